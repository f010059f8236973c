#include "mmvad/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace mmvad::io {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "float32 payload requires IEEE-754 floats");

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  if constexpr (std::is_same_v<T, float>) {
    const auto bits = std::bit_cast<std::uint32_t>(value);
    for (std::size_t i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  } else {
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::string& source, const char* field) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw FormatError(source + ": truncated header (" + field + ")");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

template <typename T>
T parse_number(std::string_view text, const std::string& where) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw FormatError(where + ": cannot parse '" + std::string(text) + "'");
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

// Two-column CSV with a fixed header.
std::vector<std::pair<std::string, std::string>> read_csv2(const std::filesystem::path& path,
                                                           std::string_view header) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != header)
    throw FormatError(path.string() + ": expected header '" + std::string(header) + "'");
  std::vector<std::pair<std::string, std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto comma = t.find(',');
    if (comma == std::string_view::npos || t.find(',', comma + 1) != std::string_view::npos)
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
    rows.emplace_back(std::string(trim(t.substr(0, comma))), std::string(trim(t.substr(comma + 1))));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_embeddings(std::ostream& out, const EmbeddingMatrix& m) {
  const std::size_t dim = m.dim(), count = m.count();
  if (dim > std::numeric_limits<std::uint32_t>::max() || count > std::numeric_limits<std::uint32_t>::max())
    throw FormatError("embedding matrix too large for the u32 header");
  out.write(kEmbeddingMagic, 4);
  put_le<std::uint32_t>(out, kEmbeddingVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(m.modality()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(count));
  for (double v : m.data()) put_le<float>(out, static_cast<float>(v));
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  auto out = open_out(path, std::ios::binary);
  write_embeddings(out, m);
  finish(out, path);
}

EmbeddingMatrix read_embeddings(std::istream& in, const std::string& source) {
  char magic[4];
  if (!in.read(magic, 4)) throw FormatError(source + ": truncated header (magic)");
  if (std::memcmp(magic, kEmbeddingMagic, 4) != 0) throw FormatError(source + ": bad magic, expected MMVE");
  const auto version = get_le<std::uint32_t>(in, source, "version");
  if (version != kEmbeddingVersion)
    throw FormatError(source + ": unsupported version " + std::to_string(version));
  const auto modality = get_le<std::uint8_t>(in, source, "modality");
  if (modality > 2) throw FormatError(source + ": unknown modality code " + std::to_string(modality));
  const auto dim = get_le<std::uint32_t>(in, source, "dim");
  const auto count = get_le<std::uint32_t>(in, source, "count");
  if (dim == 0) throw FormatError(source + ": dim must be positive");

  const std::size_t n = std::size_t(dim) * count;
  std::vector<double> data(n);
  unsigned char buf[4];
  for (std::size_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf), 4))
      throw FormatError(source + ": truncated payload at value " + std::to_string(i) + " of " + std::to_string(n));
    const std::uint32_t bits = std::uint32_t(buf[0]) | std::uint32_t(buf[1]) << 8 | std::uint32_t(buf[2]) << 16 |
                               std::uint32_t(buf[3]) << 24;
    data[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(source + ": trailing bytes after payload");
  return EmbeddingMatrix(static_cast<Modality>(modality), dim, std::move(data));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  return read_embeddings(in, path.string());
}

void write_captions(const std::filesystem::path& path, const std::vector<SegmentRecord>& segments) {
  auto out = open_out(path);
  for (const auto& s : segments) {
    nlohmann::ordered_json j;
    j["index"] = s.index;
    j["frame_start"] = s.frame_start;
    j["frame_end"] = s.frame_end;
    j["visual"] = s.visual_caption;
    j["audio"] = s.audio_caption ? nlohmann::ordered_json(*s.audio_caption) : nlohmann::ordered_json(nullptr);
    out << j.dump() << '\n';
  }
  finish(out, path);
}

std::vector<SegmentRecord> read_captions(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<SegmentRecord> segments;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
    auto need_int = [&](const char* key) -> std::int64_t {
      if (!j.contains(key) || !j[key].is_number_integer())
        throw FormatError(where + ": field '" + key + "' must be an integer");
      return j[key].get<std::int64_t>();
    };
    SegmentRecord s;
    const auto index = need_int("index");
    if (index < 0) throw FormatError(where + ": negative index");
    s.index = static_cast<std::size_t>(index);
    s.frame_start = need_int("frame_start");
    s.frame_end = need_int("frame_end");
    if (!j.contains("visual") || !j["visual"].is_string())
      throw FormatError(where + ": field 'visual' must be a string");
    s.visual_caption = j["visual"].get<std::string>();
    if (j.contains("audio") && !j["audio"].is_null()) {
      if (!j["audio"].is_string()) throw FormatError(where + ": field 'audio' must be a string or null");
      s.audio_caption = j["audio"].get<std::string>();
    }
    segments.push_back(std::move(s));
  }
  return segments;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  out << "frame,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
  finish(out, path);
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::vector<int> labels;
  for (const auto& [frame, label] : read_csv2(path, "frame,label")) {
    const auto f = parse_number<std::size_t>(frame, path.string());
    if (f != labels.size())
      throw FormatError(path.string() + ": frame " + frame + " out of order, expected " + std::to_string(labels.size()));
    const int l = parse_number<int>(label, path.string());
    if (l != 0 && l != 1) throw FormatError(path.string() + ": label at frame " + frame + " must be 0 or 1");
    labels.push_back(l);
  }
  return labels;
}

void write_scores(const std::filesystem::path& path, const std::vector<double>& frame_scores) {
  auto out = open_out(path);
  out << "frame,score\n";
  for (std::size_t i = 0; i < frame_scores.size(); ++i) out << i << ',' << format_double(frame_scores[i]) << '\n';
  finish(out, path);
}

std::vector<double> read_scores(const std::filesystem::path& path) {
  std::vector<double> scores;
  for (const auto& [frame, score] : read_csv2(path, "frame,score")) {
    const auto f = parse_number<std::size_t>(frame, path.string());
    if (f != scores.size())
      throw FormatError(path.string() + ": frame " + frame + " out of order, expected " + std::to_string(scores.size()));
    const double v = parse_number<double>(score, path.string());
    if (!std::isfinite(v)) throw FormatError(path.string() + ": non-finite score at frame " + frame);
    scores.push_back(v);
  }
  return scores;
}

void write_loss_history(const std::filesystem::path& path, const std::vector<double>& losses) {
  auto out = open_out(path);
  out << "iteration,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out << i << ',' << format_double(losses[i]) << '\n';
  finish(out, path);
}

}  // namespace mmvad::io
