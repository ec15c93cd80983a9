#include "rgnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "rgnn/error.hpp"
#include "rgnn/random.hpp"

namespace rgnn {
namespace {

constexpr std::uint32_t kUnsignedByteType = 0x08;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidData(fmt::format("cannot open {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Splits one CSV record. Quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw FormatError(fmt::format("line {}: unterminated quoted field", line_no));
  fields.push_back(std::move(field));
  return fields;
}

double parse_number(std::string_view text, std::size_t line_no, std::size_t column) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value))
    throw FormatError(fmt::format("line {}, column {}: `{}` is not a number", line_no,
                                  column + 1, text));
  return value;
}

}  // namespace

void LabeledDataset::validate() const {
  if (static_cast<Index>(labels.size()) != samples.rows())
    throw InvalidData(fmt::format("{} samples but {} labels", samples.rows(), labels.size()));
  if (targets.rows() != samples.rows() || targets.cols() != class_count)
    throw InvalidData("target matrix has the wrong shape");
  if (!samples.allFinite()) throw InvalidData("samples contain non-finite values");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 0 || label >= class_count)
      throw InvalidData(fmt::format("label {} outside 0..{}", label, class_count - 1));
    const auto row = targets.row(static_cast<Index>(i));
    if (row(label) != 1.0 || row.sum() != 1.0)
      throw InvalidData(fmt::format("target row {} is not one-hot for label {}", i, label));
  }
}

LabeledDataset make_dataset(Matrix samples, std::vector<int> labels, int class_count) {
  LabeledDataset ds;
  ds.samples = std::move(samples);
  ds.labels = std::move(labels);
  ds.class_count = class_count;
  for (int label : ds.labels)
    if (label < 0 || label >= class_count)
      throw InvalidData(fmt::format("label {} outside 0..{}", label, class_count - 1));
  ds.targets = one_hot(ds.labels, class_count);
  ds.validate();
  return ds;
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("IDX: file shorter than the magic number");
  const std::uint32_t magic = read_be32(bytes, 0);
  const std::uint32_t rank = magic & 0xFF;
  if ((magic >> 16) != 0 || ((magic >> 8) & 0xFF) != kUnsignedByteType || rank == 0)
    throw FormatError(fmt::format("IDX: bad magic 0x{:08x}", magic));
  const std::size_t header = 4 + 4 * std::size_t{rank};
  if (bytes.size() < header) throw FormatError("IDX: truncated dimension header");
  IdxTensor tensor;
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    tensor.dims.push_back(read_be32(bytes, 4 + 4 * i));
    count *= tensor.dims.back();
  }
  if (bytes.size() < header + count)
    throw FormatError(fmt::format("IDX: payload truncated ({} of {} bytes)", bytes.size() - header,
                                  count));
  if (bytes.size() > header + count) throw FormatError("IDX: trailing bytes after payload");
  tensor.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return tensor;
}

IdxTensor read_idx(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_idx(bytes);
}

std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor) {
  std::vector<std::uint8_t> out;
  append_be32(out, (kUnsignedByteType << 8) | static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) append_be32(out, d);
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

void write_idx(const std::filesystem::path& path, const IdxTensor& tensor) {
  const auto bytes = serialize_idx(tensor);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument(fmt::format("cannot write {}", path.string()));
}

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto image_tensor = read_idx(images);
  const auto label_tensor = read_idx(labels);
  if (image_tensor.dims.size() != 3)
    throw FormatError(fmt::format("{}: expected a rank-3 image tensor", images.string()));
  if (label_tensor.dims.size() != 1)
    throw FormatError(fmt::format("{}: expected a rank-1 label vector", labels.string()));
  const std::size_t n = image_tensor.dims[0];
  if (label_tensor.dims[0] != n)
    throw InvalidData(fmt::format("{} images but {} labels", n, label_tensor.dims[0]));
  const std::size_t pixels = std::size_t{image_tensor.dims[1]} * image_tensor.dims[2];

  Matrix samples(static_cast<Index>(n), static_cast<Index>(pixels));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < pixels; ++j)
      samples(static_cast<Index>(i), static_cast<Index>(j)) =
          image_tensor.data[i * pixels + j] / 255.0;
  std::vector<int> y(label_tensor.data.begin(), label_tensor.data.end());
  const int classes = y.empty() ? 0 : 1 + *std::max_element(y.begin(), y.end());
  return make_dataset(std::move(samples), std::move(y), classes);
}

LabeledDataset load_csv(const std::filesystem::path& path, int label_column, bool has_header) {
  std::ifstream in(path);
  if (!in) throw InvalidData(fmt::format("cannot open {}", path.string()));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (has_header && line_no == 1) continue;
    const auto fields = split_record(line, line_no);
    if (rows.empty()) width = fields.size();
    if (fields.size() != width)
      throw FormatError(fmt::format("line {}: expected {} fields, found {}", line_no, width,
                                    fields.size()));
    std::vector<double> values;
    values.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      values.push_back(parse_number(fields[c], line_no, c));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw InvalidData(fmt::format("{}: no data rows", path.string()));
  if (width < 2) throw FormatError("CSV needs a label column and at least one feature");
  const int signed_width = static_cast<int>(width);
  const int label_col = label_column < 0 ? signed_width + label_column : label_column;
  if (label_col < 0 || label_col >= signed_width)
    throw InvalidArgument(fmt::format("label column {} outside the {} CSV columns", label_column,
                                      width));

  std::map<double, int> label_index;
  for (const auto& r : rows) label_index.emplace(r[static_cast<std::size_t>(label_col)], 0);
  int next = 0;
  for (auto& [value, idx] : label_index) idx = next++;

  Matrix raw(static_cast<Index>(rows.size()), static_cast<Index>(width - 1));
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<int>(c) == label_col)
        labels.push_back(label_index.at(rows[i][c]));
      else
        raw(static_cast<Index>(i), col++) = rows[i][c];
    }
  }
  return make_dataset(minmax_normalize(raw), std::move(labels), next);
}

Matrix minmax_normalize(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    const double lo = x.col(c).minCoeff();
    const double hi = x.col(c).maxCoeff();
    if (hi > lo)
      out.col(c) = (x.col(c).array() - lo) / (hi - lo);
    else
      out.col(c).setZero();
  }
  return out;
}

Matrix one_hot(std::span<const int> labels, int class_count) {
  if (class_count < 1) throw InvalidArgument("one_hot: class count must be positive");
  Matrix t = Matrix::Zero(static_cast<Index>(labels.size()), class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count)
      throw InvalidArgument(fmt::format("one_hot: label {} outside 0..{}", labels[i],
                                        class_count - 1));
    t(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return t;
}

LabeledDataset subset(const LabeledDataset& ds, std::span<const Index> rows) {
  LabeledDataset out;
  out.class_count = ds.class_count;
  out.samples.resize(static_cast<Index>(rows.size()), ds.features());
  out.targets.resize(static_cast<Index>(rows.size()), ds.class_count);
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= ds.size()) throw InvalidArgument("subset: row index out of range");
    out.samples.row(static_cast<Index>(i)) = ds.samples.row(r);
    out.targets.row(static_cast<Index>(i)) = ds.targets.row(r);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(r)]);
  }
  return out;
}

LabeledDataset head(const LabeledDataset& ds, Index n) {
  std::vector<Index> rows(static_cast<std::size_t>(std::min(n, ds.size())));
  std::iota(rows.begin(), rows.end(), Index{0});
  return subset(ds, rows);
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double test_fraction,
                                                std::uint64_t seed, bool stratified) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument(fmt::format("test_fraction must lie in (0, 1), got {}", test_fraction));
  Xoshiro256 rng(seed);
  std::vector<bool> to_test(static_cast<std::size_t>(ds.size()), false);

  auto pick = [&](std::vector<Index> pool) {
    shuffle(std::span<Index>(pool), rng);
    const auto n_test = static_cast<std::size_t>(
        std::llround(static_cast<double>(pool.size()) * test_fraction));
    for (std::size_t i = 0; i < n_test; ++i) to_test[static_cast<std::size_t>(pool[i])] = true;
  };

  if (stratified) {
    std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(ds.class_count));
    for (Index i = 0; i < ds.size(); ++i)
      by_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      if (by_class[c].empty()) continue;
      if (by_class[c].size() < 2)
        throw InvalidData(fmt::format("class {} has fewer than 2 samples; cannot stratify", c));
      pick(std::move(by_class[c]));
    }
  } else {
    std::vector<Index> all(static_cast<std::size_t>(ds.size()));
    std::iota(all.begin(), all.end(), Index{0});
    pick(std::move(all));
  }

  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  for (Index i = 0; i < ds.size(); ++i)
    (to_test[static_cast<std::size_t>(i)] ? test_rows : train_rows).push_back(i);
  return {subset(ds, train_rows), subset(ds, test_rows)};
}

}  // namespace rgnn
