#pragma once

// Versioned binary container for model parameters, optimizer state and
// string metadata (configuration echo, hashes, epoch).
//
// Layout, all integers little-endian:
//   "LOCOCKPT"                      8 bytes
//   version                         u32 (currently 1)
//   metadata count                  u32
//     key length u32, key bytes, value length u32, value bytes   (sorted by key)
//   tensor count                    u32
//     name length u32, name bytes, ndim u32, ndim x u64 dims,
//     prod(dims) x f64 values (IEEE-754 binary64, row-major)
//
// Model tensors use their layout names ("gru.update.input", ...). Optimizer
// moments are stored as "adam.m.<name>" and "adam.v.<name>"; the step counter
// and hyperparameters live in metadata under "adam.*". Model sizes are in
// "model.input", "model.hidden", "model.channels".

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "loco/rnn.hpp"

namespace loco {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  rnn::ModelParams params;
  std::optional<rnn::AdamState> adam;
  std::map<std::string, std::string> meta;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::string_view bytes);

/// Writes through a temporary file and renames, so an existing checkpoint
/// is never left half-written.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace loco
