#include "rgnn/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <fmt/format.h>

#include "json_io.hpp"
#include "rgnn/error.hpp"

namespace rgnn {
namespace {

constexpr char kMagic[8] = {'R', 'G', 'N', 'N', 'M', 'O', 'D', 'L'};
constexpr std::size_t kHeaderSize = 8 + 4 + 8 + 8;

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void text(std::string_view s) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
    out_.insert(out_.end(), p, p + s.size());
  }

  template <typename Derived>
  void matrix(const Eigen::MatrixBase<Derived>& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Index c = 0; c < m.cols(); ++c)
      for (Index r = 0; r < m.rows(); ++r) f64(m(r, c));
  }

  void section(std::string_view name, const Writer& body) {
    u32(static_cast<std::uint32_t>(name.size()));
    text(name);
    u64(body.out_.size());
    bytes(body.out_);
  }

  std::vector<std::uint8_t>& data() { return out_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }

  std::span<const std::uint8_t> take(std::uint64_t n) {
    if (n > remaining()) malformed("unexpected end of data");
    auto s = bytes_.subspan(pos_, static_cast<std::size_t>(n));
    pos_ += static_cast<std::size_t>(n);
    return s;
  }

  std::string text(std::uint64_t n) {
    const auto s = take(n);
    return {s.begin(), s.end()};
  }

  Matrix matrix() {
    const auto rows = u64();
    const auto cols = u64();
    if (rows != 0 && cols > remaining() / 8 / rows) malformed("matrix larger than its section");
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index c = 0; c < m.cols(); ++c)
      for (Index r = 0; r < m.rows(); ++r) m(r, c) = f64();
    return m;
  }

  RowVector row() {
    Matrix m = matrix();
    if (m.rows() != 1) malformed("expected a row vector");
    return m.row(0);
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  [[noreturn]] static void malformed(std::string_view what) {
    throw ChecksumError(fmt::format("malformed model payload: {}", what));
  }

 private:
  std::uint64_t get(int width) {
    const auto s = take(static_cast<std::uint64_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(s[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Writer write_layer(const GraphLayer& layer) {
  Writer w;
  const auto& spec = layer.spec;
  w.u32(spec.node_count());
  w.f64(spec.connection_probability());
  w.u64(spec.seed());
  w.u64(spec.edges().size());
  for (const auto& e : spec.edges()) {
    w.u32(e.from);
    w.u32(e.to);
  }
  w.u64(layer.neurons.size());
  for (const auto& neuron : layer.neurons) {
    w.u64(neuron.windows.size());
    for (const auto& window : neuron.windows) {
      w.matrix(window.omega);
      w.matrix(window.phase);
    }
    w.matrix(neuron.combiner);
    w.matrix(neuron.bias);
  }
  for (NodeId q : layer.order) w.u32(q);
  w.matrix(layer.enhancement);
  w.matrix(layer.enhancement_bias);
  return w;
}

GraphLayer read_layer(Reader& r, Activation activation) {
  const NodeId n = r.u32();
  const double p = r.f64();
  const std::uint64_t seed = r.u64();
  const auto edge_count = r.u64();
  if (edge_count > r.remaining() / 8) Reader::malformed("edge list larger than its section");
  std::vector<Edge> edges;
  for (std::uint64_t k = 0; k < edge_count; ++k) {
    Edge e;
    e.from = r.u32();
    e.to = r.u32();
    edges.push_back(e);
  }
  GraphLayer layer{GraphSpec(n, p, seed, std::move(edges)), {}, {}, {}, {}, activation};
  const auto neuron_count = r.u64();
  if (neuron_count != n) Reader::malformed("neuron count differs from node count");
  for (std::uint64_t i = 0; i < neuron_count; ++i) {
    NeuronParams neuron;
    neuron.activation = activation;
    const auto windows = r.u64();
    if (windows > r.remaining()) Reader::malformed("window count larger than its section");
    for (std::uint64_t k = 0; k < windows; ++k) {
      FrfWindow window;
      window.omega = r.matrix();
      window.phase = r.row();
      neuron.windows.push_back(std::move(window));
    }
    neuron.combiner = r.matrix();
    neuron.bias = r.row();
    layer.neurons.push_back(std::move(neuron));
  }
  for (NodeId i = 0; i < n; ++i) layer.order.push_back(r.u32());
  layer.enhancement = r.matrix();
  layer.enhancement_bias = r.row();
  layer.validate();
  return layer;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::vector<std::uint8_t> serialize_model(const RgnnModel& model) {
  using json_io::json;
  std::vector<std::pair<std::string, Writer>> sections;

  Writer sae;
  sae.f64(model.sae.lambda);
  sae.matrix(model.sae.projection);
  sae.matrix(model.sae.weights);
  sections.emplace_back("sae", std::move(sae));
  for (std::size_t j = 0; j < model.layers.size(); ++j)
    sections.emplace_back(fmt::format("layer.{}", j), write_layer(model.layers[j]));
  Writer output;
  output.matrix(model.output_weights);
  sections.emplace_back("output", std::move(output));

  json names = json::array();
  for (const auto& [name, body] : sections) names.push_back(name);
  const json manifest = {{"format_version", kModelFormatVersion},
                         {"seed", model.seed},
                         {"class_count", model.class_count},
                         {"architecture", json_io::to_json(model.arch)},
                         {"solver", json_io::to_json(model.solver)},
                         {"sections", names}};
  Writer manifest_body;
  manifest_body.text(manifest.dump(1));

  Writer payload;
  payload.section("manifest", manifest_body);
  for (const auto& [name, body] : sections) payload.section(name, body);

  Writer file;
  file.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof kMagic));
  file.u32(kModelFormatVersion);
  file.u64(payload.data().size());
  file.u64(fnv1a64(payload.data()));
  file.bytes(payload.data());
  return std::move(file.data());
}

RgnnModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw VersionError("not an RGNN model file (bad magic)");
  if (bytes.size() < kHeaderSize) throw ChecksumError("model file truncated inside the header");
  Reader header(bytes.subspan(sizeof kMagic, kHeaderSize - sizeof kMagic));
  const auto version = header.u32();
  if (version != kModelFormatVersion)
    throw VersionError(fmt::format("model format version {} is not supported (this build reads {})",
                                   version, kModelFormatVersion));
  const auto payload_size = header.u64();
  const auto checksum = header.u64();
  const auto payload = bytes.subspan(kHeaderSize);
  if (payload.size() != payload_size)
    throw ChecksumError(fmt::format("model payload is {} bytes, header says {}", payload.size(),
                                    payload_size));
  if (fnv1a64(payload) != checksum) throw ChecksumError("model checksum mismatch");

  Reader r(payload);
  auto read_section = [&r](std::string_view expected) {
    const auto name = r.text(r.u32());
    if (name != expected) Reader::malformed(fmt::format("expected section {}, found {}", expected, name));
    return Reader(r.take(r.u64()));
  };

  RgnnModel model;
  try {
    auto manifest_reader = read_section("manifest");
    const auto manifest = json_io::json::parse(manifest_reader.text(manifest_reader.remaining()));
    json_io::ObjectReader m(manifest, "manifest");
    if (m.count("format_version") != kModelFormatVersion)
      throw VersionError("manifest version differs from the header");
    model.seed = m.seed("seed", 0);
    model.class_count = static_cast<Index>(m.count("class_count"));
    auto arch_reader = m.object("architecture");
    model.arch = json_io::architecture_from_json(arch_reader);
    arch_reader.finish();
    auto solver_reader = m.object("solver");
    model.solver = json_io::solver_from_json(solver_reader);
    solver_reader.finish();
    const auto sections = m.raw("sections");
    m.finish();
    if (!sections.is_array() || sections.size() != model.arch.graphs.size() + 2)
      Reader::malformed("section list does not match the architecture");

    auto sae = read_section("sae");
    model.sae.lambda = sae.f64();
    model.sae.projection = sae.matrix();
    model.sae.weights = sae.matrix();
    for (std::size_t j = 0; j < model.arch.graphs.size(); ++j) {
      auto layer = read_section(fmt::format("layer.{}", j));
      model.layers.push_back(read_layer(layer, model.arch.activation));
    }
    auto output = read_section("output");
    model.output_weights = output.matrix();
  } catch (const json_io::json::exception& e) {
    Reader::malformed(e.what());
  } catch (const ConfigError& e) {
    Reader::malformed(e.what());
  } catch (const InvalidArgument& e) {
    Reader::malformed(e.what());
  } catch (const InvalidState& e) {
    Reader::malformed(e.what());
  }
  if (r.remaining() != 0) Reader::malformed("trailing bytes after the last section");
  if (model.sae.weights.rows() != model.sae.projection.cols() ||
      model.sae.weights.cols() != model.sae.projection.rows())
    Reader::malformed("SAE matrices have inconsistent shapes");
  Index width = model.sae.hidden_dim();
  for (const auto& layer : model.layers) {
    if (layer.input_dim() != width) Reader::malformed("graph layer input width mismatch");
    width = layer.output_width();
  }
  if (model.output_weights.rows() != model.pattern_width() ||
      model.output_weights.cols() != model.class_count)
    Reader::malformed("output weights do not match the architecture");
  return model;
}

void save_model(const std::filesystem::path& path, const RgnnModel& model) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument(fmt::format("cannot write {}", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InvalidArgument(fmt::format("write to {} failed", path.string()));
}

RgnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidData(fmt::format("cannot open {}", path.string()));
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace rgnn
