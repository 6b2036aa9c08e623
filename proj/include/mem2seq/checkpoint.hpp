#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mem2seq/config.hpp"
#include "mem2seq/model.hpp"
#include "mem2seq/rng.hpp"

namespace m2s {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unrecognized magic bytes or format version.
class CheckpointVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

struct Checkpoint {
  Mem2Seq model;
  TrainConfig config;
  /// Epoch at which `model` was captured; 0 for an untrained model.
  std::size_t epoch = 0;
  double best_score = 0.0;
  Rng::State rng;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: magic "M2SCKPT\0", u32 version, config text, vocab words,
/// parameter blocks (name, shape, little-endian f64 values), epoch, best
/// score, rng state, then an FNV-1a 64 checksum of everything before it.
/// Integers are little-endian u64 unless noted.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in, const std::string& source);

/// Writes to a sibling temporary file and renames it over `path`.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// FNV-1a 64 over every parameter name, shape and value bit pattern, in
/// store order.
std::uint64_t parameter_checksum(const ParameterStore& params);

}  // namespace m2s
