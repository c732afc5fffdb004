#include "mick/episode.hpp"

#include <numeric>
#include <set>
#include <utility>

#include "mick/error.hpp"

namespace mick {

namespace {

// First `count` entries of a uniformly shuffled 0..n-1.
std::vector<std::size_t> partial_shuffle(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

EncodedInstance encode_instance(const Instance& raw, const Vocab& vocab, std::size_t max_length) {
  if (max_length == 0) throw ValidationError("maximum length must be positive");
  if (raw.tokens.empty()) throw ValidationError("cannot encode an instance with no tokens");
  const Instance exploded = vocab.mode() == VocabMode::kChar ? explode_chars(raw) : Instance{};
  const Instance& inst = vocab.mode() == VocabMode::kChar ? exploded : raw;

  const std::size_t length = std::min(inst.tokens.size(), max_length);
  if (inst.head.end > length || inst.tail.end > length) {
    throw ValidationError("entity span lies beyond the first " + std::to_string(max_length) +
                          " tokens");
  }
  EncodedInstance enc;
  enc.true_length = length;
  enc.token_ids.assign(max_length, Vocab::kPad);
  enc.pos_head.resize(max_length);
  enc.pos_tail.resize(max_length);
  for (std::size_t i = 0; i < max_length; ++i) {
    if (i < length) enc.token_ids[i] = vocab.id(inst.tokens[i]);
    const auto at = static_cast<std::ptrdiff_t>(i);
    enc.pos_head[i] = position_bucket(at, inst.head.start, max_length);
    enc.pos_tail[i] = position_bucket(at, inst.tail.start, max_length);
  }
  return enc;
}

EncodedDataset encode_dataset(const Dataset& data, const Vocab& vocab, std::size_t max_length) {
  EncodedDataset out;
  for (const auto& [label, group] : data.groups) {
    out.labels.push_back(label);
    out.origins.push_back(data.origin);
    auto& cls = out.classes.emplace_back();
    cls.reserve(group.size());
    for (const Instance& inst : group) {
      try {
        cls.push_back(encode_instance(inst, vocab, max_length));
      } catch (const ValidationError& e) {
        throw ValidationError("relation '" + label + "': " + e.what());
      }
    }
  }
  return out;
}

EncodedDataset merge_pools(const EncodedDataset& original, const EncodedDataset& cross) {
  EncodedDataset out = original;
  std::set<std::string> taken(original.labels.begin(), original.labels.end());
  for (std::size_t c = 0; c < cross.class_count(); ++c) {
    std::string label = cross.labels[c];
    if (taken.contains(label)) label += "@cross";
    taken.insert(label);
    out.labels.push_back(std::move(label));
    out.origins.push_back(cross.origins[c]);
    out.classes.push_back(cross.classes[c]);
  }
  return out;
}

EpisodeDraw draw_episode(const EncodedDataset& pool, const EpisodeShape& shape, Rng& rng) {
  if (shape.way == 0 || shape.shot == 0) throw ValidationError("way and shot must be positive");
  if (pool.class_count() < shape.way) {
    throw ValidationError("need " + std::to_string(shape.way) + " classes, pool has " +
                          std::to_string(pool.class_count()));
  }
  EpisodeDraw draw;
  draw.classes = partial_shuffle(pool.class_count(), shape.way, rng);
  const std::size_t per_class = shape.shot + shape.query;
  for (std::size_t c : draw.classes) {
    const std::size_t available = pool.classes[c].size();
    if (available < per_class) {
      throw ValidationError("relation '" + pool.labels[c] + "' has " + std::to_string(available) +
                            " instances, episode needs " + std::to_string(per_class));
    }
    draw.instances.push_back(partial_shuffle(available, per_class, rng));
  }
  return draw;
}

Episode sample_episode(const EncodedDataset& pool, const EpisodeShape& shape, Rng& rng) {
  const EpisodeDraw draw = draw_episode(pool, shape, rng);
  Episode ep;
  for (std::size_t slot = 0; slot < draw.classes.size(); ++slot) {
    const std::size_t c = draw.classes[slot];
    ep.class_labels.push_back(pool.labels[c]);
    ep.class_origins.push_back(pool.origins[c]);
    auto& support = ep.support.emplace_back();
    auto& query = ep.query.emplace_back();
    for (std::size_t i = 0; i < draw.instances[slot].size(); ++i) {
      EncodedInstance inst = pool.classes[c][draw.instances[slot][i]];
      inst.relation_slot = slot;
      (i < shape.shot ? support : query).push_back(std::move(inst));
    }
  }
  return ep;
}

}  // namespace mick
