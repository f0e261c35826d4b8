#include "eegscreen/recording.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "eegscreen/error.hpp"

namespace eegscreen {

namespace {

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    // from_chars rejects "inf"/"nan" spellings with a sign; handle them so
    // they surface as NonFiniteSample rather than BadFormat.
    std::string lower(text);
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (lower == "nan" || lower == "-nan") return std::nan("");
    if (lower == "inf" || lower == "infinity") return HUGE_VAL;
    if (lower == "-inf" || lower == "-infinity") return -HUGE_VAL;
    return std::nullopt;
  }
  return v;
}

struct Header {
  double sample_rate_hz = 0.0;
  std::string subject;
  Label label = Label::Unknown;
};

Header parse_header(std::string_view line) {
  line = trim(line);
  constexpr std::string_view magic = "#eegcsv";
  if (line.substr(0, magic.size()) != magic) throw Error(Errc::BadHeader, "missing #eegcsv magic");
  std::istringstream fields{std::string(line.substr(magic.size()))};
  std::string token;
  bool have_version = false, have_rate = false, have_subject = false, have_label = false;
  Header h;
  while (fields >> token) {
    if (token == "v1") {
      have_version = true;
      continue;
    }
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw Error(Errc::BadHeader, "unexpected token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "sample_rate_hz") {
      const auto v = parse_double(value);
      if (!v || !std::isfinite(*v) || *v <= 0.0)
        throw Error(Errc::BadHeader, "sample_rate_hz must be a positive number");
      h.sample_rate_hz = *v;
      have_rate = true;
    } else if (key == "subject") {
      if (value.empty()) throw Error(Errc::BadHeader, "empty subject");
      h.subject = value;
      have_subject = true;
    } else if (key == "label") {
      try {
        h.label = parse_label(value);
      } catch (const Error&) {
        throw Error(Errc::BadHeader, "label must be 0, 1 or ?");
      }
      have_label = true;
    } else {
      throw Error(Errc::BadHeader, "unknown key '" + key + "'");
    }
  }
  if (!have_version) throw Error(Errc::BadHeader, "unsupported version (expected v1)");
  if (!have_rate) throw Error(Errc::BadHeader, "missing sample_rate_hz");
  if (!have_subject) throw Error(Errc::BadHeader, "missing subject");
  if (!have_label) throw Error(Errc::BadHeader, "missing label");
  return h;
}

}  // namespace

Label parse_label(std::string_view text) {
  text = trim(text);
  if (text == "0") return Label::Control;
  if (text == "1") return Label::Adhd;
  if (text == "?") return Label::Unknown;
  throw Error(Errc::BadLabel, std::string(text));
}

std::string label_token(Label label) {
  switch (label) {
    case Label::Control: return "0";
    case Label::Adhd: return "1";
    case Label::Unknown: return "?";
  }
  return "?";
}

void validate(const Recording& rec) {
  if (!(rec.sample_rate_hz > 0.0) || !std::isfinite(rec.sample_rate_hz))
    throw Error(Errc::BadHeader, "sample rate must be positive");
  if (rec.n_samples == 0) throw Error(Errc::BadFormat, "recording has no samples");
  if (rec.data.size() != kNumChannels * rec.n_samples)
    throw Error(Errc::RaggedRows, "data size does not match 19 x n_samples");
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto row = rec.channel(c);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!std::isfinite(row[i]))
        throw Error(Errc::NonFiniteSample, "row " + std::to_string(i) + ", column " +
                                               std::string(channel_name(kCanonicalChannels[c])));
    }
  }
}

Recording parse_recording(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::BadHeader, "empty input");
  const Header header = parse_header(line);

  if (!std::getline(in, line)) throw Error(Errc::BadHeader, "missing channel row");
  const auto names = split(line, ',');
  std::array<std::optional<std::size_t>, kNumChannels> column_of{};
  for (std::size_t col = 0; col < names.size(); ++col) {
    const Channel ch = normalize_channel_name(names[col]);
    auto& slot = column_of[index_of(ch)];
    if (slot) throw Error(Errc::DuplicateChannel, std::string(channel_name(ch)));
    slot = col;
  }
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    if (!column_of[c]) throw Error(Errc::MissingChannel, std::string(channel_name(kCanonicalChannels[c])));
  }
  const std::size_t width = names.size();

  // Read column-major rows first, then transpose into channel rows.
  std::vector<double> samples;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != width)
      throw Error(Errc::RaggedRows, "row " + std::to_string(row) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(width));
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      const std::size_t col = *column_of[c];
      const auto v = parse_double(fields[col]);
      if (!v) throw Error(Errc::BadFormat, "row " + std::to_string(row) + ": cannot parse '" +
                                               std::string(fields[col]) + "'");
      if (!std::isfinite(*v))
        throw Error(Errc::NonFiniteSample, "row " + std::to_string(row) + ", column " +
                                               std::string(channel_name(kCanonicalChannels[c])));
      samples.push_back(*v);
    }
    ++row;
  }
  if (row == 0) throw Error(Errc::BadFormat, "no data rows");

  Recording rec;
  rec.subject_id = header.subject;
  rec.label = header.label;
  rec.sample_rate_hz = header.sample_rate_hz;
  rec.n_samples = row;
  rec.data.resize(kNumChannels * row);
  for (std::size_t i = 0; i < row; ++i)
    for (std::size_t c = 0; c < kNumChannels; ++c) rec.data[c * row + i] = samples[i * kNumChannels + c];
  return rec;
}

Recording parse_recording(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_recording(in);
}

Recording load_recording(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MissingFile, path.string());
  return parse_recording(in);
}

void write_recording(std::ostream& out, const Recording& rec) {
  validate(rec);
  std::ostringstream rate_text;
  rate_text.precision(17);
  rate_text << rec.sample_rate_hz;
  out << "#eegcsv v1 sample_rate_hz=" << rate_text.str() << " subject=" << rec.subject_id
      << " label=" << label_token(rec.label) << '\n';
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    if (c) out << ',';
    out << channel_name(kCanonicalChannels[c]);
  }
  out << '\n';
  std::array<char, 32> buf{};
  std::string line;
  for (std::size_t i = 0; i < rec.n_samples; ++i) {
    line.clear();
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      if (c) line.push_back(',');
      // shortest text that reads back as the same f32
      const auto [ptr, ec] =
          std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(rec.data[c * rec.n_samples + i]));
      line.append(buf.data(), ptr);
    }
    line.push_back('\n');
    out << line;
  }
}

void save_recording(const std::filesystem::path& path, const Recording& rec) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  write_recording(out, rec);
  if (!out) throw Error(Errc::Io, "write failed: " + path.string());
}

}  // namespace eegscreen
