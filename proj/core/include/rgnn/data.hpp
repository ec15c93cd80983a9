#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "rgnn/solver.hpp"

namespace rgnn {

/// Samples in [0, 1] with dense integer labels and their one-hot targets.
struct LabeledDataset {
  Matrix samples;           // N x N_f
  std::vector<int> labels;  // N entries in 0..class_count-1
  Matrix targets;           // N x class_count one-hot
  int class_count = 0;

  Index size() const { return samples.rows(); }
  Index features() const { return samples.cols(); }

  /// Throws InvalidData when an invariant is broken.
  void validate() const;
};

/// Builds targets from labels and validates the result.
LabeledDataset make_dataset(Matrix samples, std::vector<int> labels, int class_count);

/// Raw IDX tensor with unsigned-byte payload.
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

/// Big-endian magic 0x000008NN (NN = rank), big-endian u32 dims, then bytes.
/// Throws FormatError on bad magic, truncation or trailing bytes.
IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
IdxTensor read_idx(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor);
void write_idx(const std::filesystem::path& path, const IdxTensor& tensor);

/// Images (rank 3, magic 0x803) scaled by 1/255 and flattened row-major;
/// labels from a rank-1 file (magic 0x801). Class count is 1 + max label.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Numeric CSV with `.` decimals and RFC-4180 quoting. Feature columns are
/// min-max normalised to [0, 1]; label values are re-indexed densely in
/// ascending numeric order. A negative label_column counts from the end.
LabeledDataset load_csv(const std::filesystem::path& path, int label_column, bool has_header);

/// Per column (x - min) / (max - min); constant columns become 0.
Matrix minmax_normalize(const Matrix& x);

Matrix one_hot(std::span<const int> labels, int class_count);

LabeledDataset subset(const LabeledDataset& ds, std::span<const Index> rows);

/// First n rows (or all when n >= size()).
LabeledDataset head(const LabeledDataset& ds, Index n);

/// Deterministic train/test split. The test side gets round(N * fraction)
/// rows, or round(n_c * fraction) per class when stratified. Both sides
/// keep the original row order.
std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double test_fraction,
                                                std::uint64_t seed, bool stratified);

}  // namespace rgnn
