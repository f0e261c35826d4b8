#include "eegscreen/channels.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "eegscreen/error.hpp"

namespace eegscreen {

namespace {

constexpr std::array<std::string_view, kNumChannels> kNames = {
    "Fz", "Cz", "Pz", "C3", "C4", "T3", "T4", "Fp1", "Fp2", "F3",
    "F4", "F7", "F8", "P3", "P4", "T5", "T6", "O1",  "O2",
};

constexpr std::array<std::pair<std::string_view, Channel>, 4> kAliases = {{
    {"P7", Channel::T5},
    {"P8", Channel::T6},
    {"T7", Channel::T3},
    {"T8", Channel::T4},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view channel_name(Channel c) { return kNames[index_of(c)]; }

Channel normalize_channel_name(std::string_view raw) {
  const std::string_view name = trim(raw);
  if (name.empty()) throw Error(Errc::UnknownChannel, "empty channel name");
  for (std::size_t i = 0; i < kNumChannels; ++i) {
    if (iequals(name, kNames[i])) return kCanonicalChannels[i];
  }
  for (const auto& [alias, channel] : kAliases) {
    if (iequals(name, alias)) return channel;
  }
  throw Error(Errc::UnknownChannel, std::string(name));
}

}  // namespace eegscreen
