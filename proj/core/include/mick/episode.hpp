#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mick/data.hpp"
#include "mick/vocab.hpp"

namespace mick {

using Rng = std::mt19937_64;

/// Fixed-length model input. Position buckets hold the signed offset from
/// the entity's first token, clamped to +-(T-1) and shifted by T-1, so every
/// bucket lies in [0, 2T-2].
struct EncodedInstance {
  std::vector<std::uint32_t> token_ids;
  std::vector<std::uint32_t> pos_head;
  std::vector<std::uint32_t> pos_tail;
  std::size_t true_length = 0;
  std::size_t relation_slot = 0;

  std::size_t max_length() const noexcept { return token_ids.size(); }
  friend bool operator==(const EncodedInstance&, const EncodedInstance&) = default;
};

inline std::uint32_t position_bucket(std::ptrdiff_t index, std::size_t entity_start,
                                     std::size_t max_length) {
  const auto limit = static_cast<std::ptrdiff_t>(max_length) - 1;
  std::ptrdiff_t offset = index - static_cast<std::ptrdiff_t>(entity_start);
  offset = offset < -limit ? -limit : (offset > limit ? limit : offset);
  return static_cast<std::uint32_t>(offset + limit);
}

/// Pads or truncates to `max_length` tokens. In character mode the instance
/// is exploded into characters first. Throws ValidationError for an empty
/// token list or when truncation would cut an entity.
EncodedInstance encode_instance(const Instance& inst, const Vocab& vocab, std::size_t max_length);

/// A dataset with every instance encoded, classes in label order.
struct EncodedDataset {
  std::vector<std::string> labels;
  std::vector<std::vector<EncodedInstance>> classes;
  std::vector<Origin> origins;

  std::size_t class_count() const noexcept { return labels.size(); }
};

EncodedDataset encode_dataset(const Dataset& data, const Vocab& vocab, std::size_t max_length);

/// Class pool for mixed sampling. A cross-domain label that collides with an
/// original one is suffixed with "@cross" so the classes stay distinct.
EncodedDataset merge_pools(const EncodedDataset& original, const EncodedDataset& cross);

struct EpisodeShape {
  std::size_t way = 5;
  std::size_t shot = 5;
  std::size_t query = 5;
};

/// One N-way K-shot task. Row i of support and query belongs to class slot i.
struct Episode {
  std::vector<std::string> class_labels;
  std::vector<Origin> class_origins;
  std::vector<std::vector<EncodedInstance>> support;
  std::vector<std::vector<EncodedInstance>> query;

  std::size_t way() const noexcept { return class_labels.size(); }
};

/// Draws N classes uniformly without replacement, then K+Q instances per
/// class uniformly without replacement; the first K go to support. Fully
/// determined by the generator state.
Episode sample_episode(const EncodedDataset& pool, const EpisodeShape& shape, Rng& rng);

// Same draw, returning (class index, instance indices) without copying.
struct EpisodeDraw {
  std::vector<std::size_t> classes;
  std::vector<std::vector<std::size_t>> instances;
};
EpisodeDraw draw_episode(const EncodedDataset& pool, const EpisodeShape& shape, Rng& rng);

}  // namespace mick
