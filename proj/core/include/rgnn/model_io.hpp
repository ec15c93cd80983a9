#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rgnn/network.hpp"

namespace rgnn {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary model artifact, all integers and doubles little-endian:
///
///   bytes 0..7    magic "RGNNMODL"
///   u32           format version
///   u64           payload size in bytes
///   u64           FNV-1a 64 checksum of the payload
///   payload       sections: u32 name length, name, u64 body length, body
///
/// The first section, "manifest", is JSON text holding the architecture and
/// solver snapshot, seed, class count and the list of remaining sections.
/// Matrices are stored as u64 rows, u64 cols, then column-major doubles.
std::vector<std::uint8_t> serialize_model(const RgnnModel& model);

/// Throws VersionError on a bad magic or unsupported version and
/// ChecksumError on truncation, a checksum mismatch or a malformed payload.
RgnnModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const std::filesystem::path& path, const RgnnModel& model);
RgnnModel load_model(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace rgnn
