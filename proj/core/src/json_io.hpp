#pragma once

// JSON mapping of the configuration structs, shared by the run config loader
// and the model manifest. Internal to the library.

#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rgnn/ensemble.hpp"
#include "rgnn/network.hpp"
#include "rgnn/solver.hpp"

namespace rgnn::json_io {

using nlohmann::json;

/// Reads typed fields of one JSON object and rejects unknown keys. Every
/// error is a ConfigError naming the dotted key path.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path);

  bool has(std::string_view key) const;
  const json& raw(std::string_view key);
  std::string key_path(std::string_view key) const;

  double number(std::string_view key);
  double number(std::string_view key, double fallback);
  std::optional<double> optional_number(std::string_view key);
  std::size_t count(std::string_view key);
  std::size_t count(std::string_view key, std::size_t fallback);
  std::int64_t integer(std::string_view key, std::int64_t fallback);
  std::uint64_t seed(std::string_view key, std::uint64_t fallback);
  bool flag(std::string_view key, bool fallback);
  std::string text(std::string_view key);
  std::string text(std::string_view key, std::string fallback);
  ObjectReader object(std::string_view key);

  /// Throws when a key was present but never read.
  void finish() const;

 private:
  const json& object_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

json to_json(const ArchitectureConfig& arch);
json to_json(const AdmmConfig& solver);

ArchitectureConfig architecture_from_json(ObjectReader& reader);
AdmmConfig solver_from_json(ObjectReader& reader);

std::string activation_name(Activation a);
std::string regularizer_name(Regularizer r);

}  // namespace rgnn::json_io
