#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mick/optim.hpp"
#include "mick/trainer.hpp"
#include "mick/vocab.hpp"

namespace mick {

/// Binary layout, all integers little-endian:
///
///   magic      8 bytes  "MICKCKPT"
///   version    u8       1
///   config     u32 length + UTF-8 "key = value" lines
///   vocab      u8 mode (0 word, 1 char), u32 count, count x (u32 length + bytes),
///              tokens in id order starting at id 2
///   blocks     u32 count, then per block:
///              u32 name length + name, u32 rank, rank x u64 dims,
///              product(dims) x f64 (IEEE-754 binary64)
///   checksum   u64 FNV-1a over every preceding byte
struct Checkpoint {
  TrainConfig config;
  Vocab vocab;
  std::vector<Parameter> blocks;
};

inline constexpr std::string_view kCheckpointMagic = "MICKCKPT";
inline constexpr std::uint8_t kCheckpointVersion = 1;

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::string serialize_checkpoint(const Checkpoint& ckpt);
// Throws CorruptionError on bad magic, version, checksum or truncation.
Checkpoint deserialize_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const Model& model, const TrainConfig& cfg, const Vocab& vocab);
// Throws CorruptionError when a block is missing or has the wrong shape.
Model model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace mick
