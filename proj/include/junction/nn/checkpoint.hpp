#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "junction/nn/layout.hpp"

namespace junction::nn {

/// Binary checkpoint, all integers little-endian:
///
///   offset  size  field
///   0       8     magic "JNCKPT01"
///   8       4     u32 format version (1)
///   12      4     u32 mode (0 = CTDE, 1 = CTCE)
///   16      8     u64 model version
///   24      8     u64 config hash
///   32      4     u32 layer count L
///   36      4     u32 reserved (0)
///   40      12*L  per layer: u32 in, u32 out, u32 role
///   ...     8     u64 value count V
///   ...     4*V   IEEE-754 float32 values
///   ...     8     u64 FNV-1a 64 checksum of every preceding byte
struct Checkpoint {
  ModelParameters params;
  Mode mode = Mode::kCTDE;
  std::uint64_t config_hash = 0;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws std::runtime_error on truncation, bad magic, checksum mismatch or
/// a layout/value-count inconsistency.
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace junction::nn
