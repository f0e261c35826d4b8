#include "eegscreen/cli/cli.hpp"

int main(int argc, char** argv) { return eegscreen::cli::run(argc, argv); }
