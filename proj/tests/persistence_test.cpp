#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "mick/checkpoint.hpp"
#include "mick/config.hpp"
#include "mick/error.hpp"
#include "oracles.hpp"

namespace mick {
namespace {

TEST(KeyValues, ParsesCommentsAndWhitespace) {
  const KeyValues kv = parse_key_values("# header\n alpha = 0.5  # fast\n\nseed=9\r\n");
  EXPECT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv.at("alpha"), "0.5");
  EXPECT_EQ(kv.at("seed"), "9");
}

TEST(KeyValues, RejectsLineWithoutEquals) {
  EXPECT_THROW(parse_key_values("alpha 0.5\n"), ValidationError);
}

TEST(Config, AppliesTypedKeys) {
  const TrainConfig cfg = config_from_key_values(
      {{"alpha", "0.25"}, {"epsilon", "7"}, {"hidden_dim", "64"}, {"vocab_mode", "char"},
       {"reset_fast_each_episode", "true"}, {"seed", "18446744073709551615"}});
  EXPECT_EQ(cfg.alpha, 0.25);
  EXPECT_EQ(cfg.epsilon, 7u);
  EXPECT_EQ(cfg.dims.hidden_dim, 64u);
  EXPECT_EQ(cfg.vocab_mode, VocabMode::kChar);
  EXPECT_TRUE(cfg.reset_fast_each_episode);
  EXPECT_EQ(cfg.seed, 18446744073709551615ull);
}

TEST(Config, EpisodesSplitIntoPhases) {
  const TrainConfig even = config_from_key_values({{"episodes", "3000"}});
  EXPECT_EQ(even.phase1, 1000u);
  EXPECT_EQ(even.phase2, 1000u);
  EXPECT_EQ(even.phase3, 1000u);
  const TrainConfig odd = config_from_key_values({{"episodes", "10"}, {"phase3", "1"}});
  EXPECT_EQ(odd.total_episodes(), odd.phase1 + odd.phase2 + 1);
  EXPECT_EQ(odd.phase3, 1u);
  const TrainConfig total = config_from_key_values({{"episodes", "10"}});
  EXPECT_EQ(total.total_episodes(), 10u);
}

TEST(Config, UnknownKeyAndBadValueRejected) {
  EXPECT_THROW(config_from_key_values({{"learning_rate", "0.1"}}), ValidationError);
  EXPECT_THROW(config_from_key_values({{"alpha", "fast"}}), ValidationError);
  EXPECT_THROW(config_from_key_values({{"epsilon", "-1"}}), ValidationError);
  EXPECT_THROW(config_from_key_values({{"vocab_mode", "bytes"}}), ValidationError);
}

TEST(Config, FormatRoundTrips) {
  TrainConfig cfg;
  cfg.alpha = 0.1 + 1e-17;
  cfg.beta = 1.0 / 3.0;
  cfg.epsilon = 4;
  cfg.dims.max_length = 40;
  cfg.seed = 123456789;
  const TrainConfig back = config_from_key_values(parse_key_values(format_config(cfg)));
  EXPECT_EQ(back.alpha, cfg.alpha);
  EXPECT_EQ(back.beta, cfg.beta);
  EXPECT_EQ(back.epsilon, cfg.epsilon);
  EXPECT_EQ(back.dims.max_length, 40u);
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_EQ(format_config(back), format_config(cfg));
}

TEST(Checksum, KnownFnvValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

Checkpoint random_checkpoint(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TrainConfig cfg;
  cfg.dims = {16, 4, 2, 6, 3};
  cfg.seed = seed;
  const Vocab vocab(VocabMode::kWord, {"alpha", "beta", "γάμμα", "头痛"});
  Model model = Model::init(vocab.size(), cfg);
  model.classifier.weight.value = testing::random_tensor({5, 6}, rng, -1e3, 1e3);
  model.classifier.bias.value[0] = -0.0;
  model.classifier.bias.value[1] = 5e-324;
  return make_checkpoint(model, cfg, vocab);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Checkpoint ckpt = random_checkpoint(seed);
    const std::string bytes = serialize_checkpoint(ckpt);
    const Checkpoint back = deserialize_checkpoint(bytes);
    EXPECT_EQ(serialize_checkpoint(back), bytes);
    EXPECT_EQ(back.vocab, ckpt.vocab);
    ASSERT_EQ(back.blocks.size(), ckpt.blocks.size());
    for (std::size_t i = 0; i < ckpt.blocks.size(); ++i) {
      EXPECT_EQ(back.blocks[i].name, ckpt.blocks[i].name);
      EXPECT_TRUE(bitwise_equal(back.blocks[i].value, ckpt.blocks[i].value));
    }
    const Model m = model_from_checkpoint(back);
    for (const Parameter* p : m.all_parameters()) {
      const auto it = std::find_if(ckpt.blocks.begin(), ckpt.blocks.end(),
                                   [&](const Parameter& b) { return b.name == p->name; });
      ASSERT_NE(it, ckpt.blocks.end()) << p->name;
      EXPECT_TRUE(bitwise_equal(p->value, it->value)) << p->name;
    }
    EXPECT_EQ(format_config(back.config), format_config(ckpt.config));
  }
}

TEST(Checkpoint, LayoutHeader) {
  const std::string bytes = serialize_checkpoint(random_checkpoint(1));
  EXPECT_EQ(bytes.substr(0, 8), "MICKCKPT");
  EXPECT_EQ(static_cast<std::uint8_t>(bytes[8]), kCheckpointVersion);
}

TEST(Checkpoint, EverySingleByteFlipIsDetected) {
  const std::string bytes = serialize_checkpoint(random_checkpoint(2));
  for (std::size_t i = 0; i < bytes.size(); i += 7) {
    std::string bad = bytes;
    bad[i] = static_cast<char>(bad[i] ^ 0x10);
    EXPECT_THROW(deserialize_checkpoint(bad), CorruptionError) << "byte " << i;
  }
}

TEST(Checkpoint, TruncationAndTrailingBytes) {
  const std::string bytes = serialize_checkpoint(random_checkpoint(3));
  EXPECT_THROW(deserialize_checkpoint(""), CorruptionError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 1)), CorruptionError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, 20)), CorruptionError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "x"), CorruptionError);
}

TEST(Checkpoint, MissingBlockRejected) {
  Checkpoint ckpt = random_checkpoint(4);
  ckpt.blocks.pop_back();
  EXPECT_THROW(model_from_checkpoint(ckpt), CorruptionError);
  Checkpoint wrong = random_checkpoint(4);
  wrong.blocks.front().value = Tensor({1, 1});
  EXPECT_THROW(model_from_checkpoint(wrong), CorruptionError);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() /
                    ("mick_ckpt_" + std::to_string(::getpid()) + ".bin");
  const Checkpoint ckpt = random_checkpoint(5);
  save_checkpoint(path, ckpt);
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(path)), serialize_checkpoint(ckpt));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), IoError);
}

}  // namespace
}  // namespace mick
