#include "json_io.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rgnn/error.hpp"

namespace rgnn::json_io {

ObjectReader::ObjectReader(const json& object, std::string path)
    : object_(object), path_(std::move(path)) {
  if (!object_.is_object())
    throw ConfigError(fmt::format("{} must be an object", path_.empty() ? "config" : path_));
}

std::string ObjectReader::key_path(std::string_view key) const {
  return path_.empty() ? std::string(key) : fmt::format("{}.{}", path_, key);
}

bool ObjectReader::has(std::string_view key) const {
  return object_.contains(std::string(key)) && !object_.at(std::string(key)).is_null();
}

const json& ObjectReader::raw(std::string_view key) {
  const std::string k(key);
  if (!object_.contains(k)) throw ConfigError(fmt::format("missing key {}", key_path(key)));
  seen_.insert(k);
  return object_.at(k);
}

double ObjectReader::number(std::string_view key) {
  const auto& v = raw(key);
  if (!v.is_number()) throw ConfigError(fmt::format("{} must be a number", key_path(key)));
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(fmt::format("{} must be finite", key_path(key)));
  return x;
}

double ObjectReader::number(std::string_view key, double fallback) {
  if (!has(key)) {
    seen_.insert(std::string(key));
    return fallback;
  }
  return number(key);
}

std::optional<double> ObjectReader::optional_number(std::string_view key) {
  if (!has(key)) {
    seen_.insert(std::string(key));
    return std::nullopt;
  }
  return number(key);
}

std::size_t ObjectReader::count(std::string_view key) {
  const auto& v = raw(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError(fmt::format("{} must be a non-negative integer", key_path(key)));
  return v.get<std::size_t>();
}

std::size_t ObjectReader::count(std::string_view key, std::size_t fallback) {
  if (!has(key)) {
    seen_.insert(std::string(key));
    return fallback;
  }
  return count(key);
}

std::int64_t ObjectReader::integer(std::string_view key, std::int64_t fallback) {
  if (!has(key)) {
    seen_.insert(std::string(key));
    return fallback;
  }
  const auto& v = raw(key);
  if (!v.is_number_integer()) throw ConfigError(fmt::format("{} must be an integer", key_path(key)));
  return v.get<std::int64_t>();
}

std::uint64_t ObjectReader::seed(std::string_view key, std::uint64_t fallback) {
  if (!has(key)) {
    seen_.insert(std::string(key));
    return fallback;
  }
  const auto& v = raw(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(fmt::format("{} must be a non-negative integer", key_path(key)));
  return v.get<std::uint64_t>();
}

bool ObjectReader::flag(std::string_view key, bool fallback) {
  if (!has(key)) {
    seen_.insert(std::string(key));
    return fallback;
  }
  const auto& v = raw(key);
  if (!v.is_boolean()) throw ConfigError(fmt::format("{} must be true or false", key_path(key)));
  return v.get<bool>();
}

std::string ObjectReader::text(std::string_view key) {
  const auto& v = raw(key);
  if (!v.is_string()) throw ConfigError(fmt::format("{} must be a string", key_path(key)));
  return v.get<std::string>();
}

std::string ObjectReader::text(std::string_view key, std::string fallback) {
  if (!has(key)) {
    seen_.insert(std::string(key));
    return fallback;
  }
  return text(key);
}

ObjectReader ObjectReader::object(std::string_view key) {
  return ObjectReader(raw(key), key_path(key));
}

void ObjectReader::finish() const {
  for (const auto& item : object_.items())
    if (!seen_.contains(item.key()))
      throw ConfigError(fmt::format("unknown key {}", key_path(item.key())));
}

std::string activation_name(Activation a) { return a == Activation::Tanh ? "tanh" : "sigmoid"; }

std::string regularizer_name(Regularizer r) { return r == Regularizer::L1 ? "l1" : "l2"; }

json to_json(const ArchitectureConfig& arch) {
  json graphs = json::array();
  for (const auto& g : arch.graphs) graphs.push_back({{"neurons", g.neurons}, {"p", g.p}});
  json j = {{"graphs", graphs},
            {"d", arch.window_width},
            {"m", arch.window_count},
            {"sigma", arch.sigma},
            {"activation", activation_name(arch.activation)},
            {"sae_hidden", arch.sae_hidden},
            {"sae_lambda", arch.sae_lambda},
            {"combiner_scale", arch.combiner_scale},
            {"enhancement_scale", arch.enhancement_scale}};
  if (arch.sigma_hidden) j["sigma_hidden"] = *arch.sigma_hidden;
  return j;
}

json to_json(const AdmmConfig& solver) {
  return {{"rho", solver.rho},
          {"lambda", solver.lambda},
          {"max_iter", solver.max_iter},
          {"ema", solver.ema_enabled},
          {"tail_window", solver.tail_window},
          {"regularizer", regularizer_name(solver.regularizer)},
          {"tolerance", solver.tolerance}};
}

ArchitectureConfig architecture_from_json(ObjectReader& reader) {
  ArchitectureConfig arch;
  const auto& graphs = reader.raw("graphs");
  if (!graphs.is_array() || graphs.empty())
    throw ConfigError(fmt::format("{} must be a non-empty array", reader.key_path("graphs")));
  for (std::size_t j = 0; j < graphs.size(); ++j) {
    ObjectReader g(graphs[j], fmt::format("{}[{}]", reader.key_path("graphs"), j));
    const auto neurons = g.count("neurons");
    if (neurons < 1 || neurons > std::numeric_limits<NodeId>::max())
      throw ConfigError(fmt::format("{} must be a positive integer", g.key_path("neurons")));
    GraphConfig cfg;
    cfg.neurons = static_cast<NodeId>(neurons);
    cfg.p = g.number("p", 0.5);
    if (!(cfg.p > 0.0 && cfg.p <= 1.0))
      throw ConfigError(fmt::format("{} must lie in (0, 1]", g.key_path("p")));
    g.finish();
    arch.graphs.push_back(cfg);
  }
  arch.window_width = static_cast<Index>(reader.count("d", 10));
  arch.window_count = static_cast<Index>(reader.count("m", 5));
  arch.sigma = reader.number("sigma", arch.sigma);
  arch.sigma_hidden = reader.optional_number("sigma_hidden");
  const auto activation = reader.text("activation", "tanh");
  if (activation == "tanh") arch.activation = Activation::Tanh;
  else if (activation == "sigmoid") arch.activation = Activation::Sigmoid;
  else
    throw ConfigError(fmt::format("{} must be \"tanh\" or \"sigmoid\", got \"{}\"",
                                  reader.key_path("activation"), activation));
  arch.sae_hidden = static_cast<Index>(reader.count("sae_hidden", 128));
  arch.sae_lambda = reader.number("sae_lambda", arch.sae_lambda);
  arch.combiner_scale = reader.number("combiner_scale", arch.combiner_scale);
  arch.enhancement_scale = reader.number("enhancement_scale", arch.enhancement_scale);
  try {
    arch.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return arch;
}

AdmmConfig solver_from_json(ObjectReader& reader) {
  AdmmConfig cfg;
  cfg.rho = reader.number("rho", cfg.rho);
  cfg.lambda = reader.number("lambda", cfg.lambda);
  cfg.max_iter = reader.count("max_iter", cfg.max_iter);
  cfg.ema_enabled = reader.flag("ema", cfg.ema_enabled);
  cfg.tail_window = reader.count("tail_window", cfg.tail_window);
  const auto reg = reader.text("regularizer", "l2");
  if (reg == "l2") cfg.regularizer = Regularizer::L2;
  else if (reg == "l1") cfg.regularizer = Regularizer::L1;
  else
    throw ConfigError(fmt::format("{} must be \"l1\" or \"l2\", got \"{}\"",
                                  reader.key_path("regularizer"), reg));
  cfg.tolerance = reader.number("tolerance", cfg.tolerance);
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("solver.{}", e.what()));
  }
  return cfg;
}

}  // namespace rgnn::json_io
