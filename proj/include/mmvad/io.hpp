#pragma once
// On-disk formats.
//
// Embedding file (little-endian):
//   "MMVE" | version u32 = 1 | modality u8 (0 visual, 1 audio, 2 text) |
//   dim u32 | count u32 | count * dim float32, row-major
// Captions: JSON Lines, one object per segment
//   {"index": int, "frame_start": int, "frame_end": int, "visual": string, "audio": string|null}
// Labels: CSV "frame,label". Scores: CSV "frame,score". Loss history: CSV "iteration,loss".

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "mmvad/core.hpp"

namespace mmvad::io {

inline constexpr char kEmbeddingMagic[4] = {'M', 'M', 'V', 'E'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

/// Values are narrowed to float32. Throws FormatError when dim or count
/// exceed u32.
void write_embeddings(std::ostream& out, const EmbeddingMatrix& m);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);

/// Throws FormatError on a bad magic/version/modality, truncated payload or
/// trailing bytes.
EmbeddingMatrix read_embeddings(std::istream& in, const std::string& source = "<stream>");
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

void write_captions(const std::filesystem::path& path, const std::vector<SegmentRecord>& segments);
std::vector<SegmentRecord> read_captions(const std::filesystem::path& path);

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);
/// Frames must appear in order 0, 1, 2, ...
std::vector<int> read_labels(const std::filesystem::path& path);

void write_scores(const std::filesystem::path& path, const std::vector<double>& frame_scores);
std::vector<double> read_scores(const std::filesystem::path& path);

void write_loss_history(const std::filesystem::path& path, const std::vector<double>& losses);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace mmvad::io
