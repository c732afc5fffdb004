#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "mick/align.hpp"
#include "mick/encoder.hpp"
#include "mick/trainer.hpp"
#include "mick/utf8.hpp"
#include "mick/vocab.hpp"

using namespace mick;

namespace {

constexpr std::size_t kVocab = 200;

std::string token(std::size_t i) { return "w" + std::to_string(i); }

Instance random_instance(std::mt19937_64& rng, std::size_t length, const std::string& label) {
  std::uniform_int_distribution<std::size_t> tok(0, kVocab - 1);
  Instance inst;
  inst.relation = label;
  for (std::size_t i = 0; i < length; ++i) inst.tokens.push_back(token(tok(rng)));
  inst.head = {1, 2};
  inst.tail = {length - 2, length - 1};
  return inst;
}

Vocab make_vocab() {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < kVocab; ++i) tokens.push_back(token(i));
  return Vocab(VocabMode::kWord, tokens);
}

TrainConfig bench_config() {
  TrainConfig cfg;
  cfg.dims = {64, 50, 5, 230, 3};
  return cfg;
}

void BM_EncoderForward(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const TrainConfig cfg = bench_config();
  const Vocab vocab = make_vocab();
  std::mt19937_64 rng(1);
  const Model model = Model::init(vocab.size(), cfg);
  const EncodedInstance inst =
      encode_instance(random_instance(rng, length, "r"), vocab, cfg.dims.max_length);
  for (auto _ : state) {
    Graph graph;
    const EncoderNodes enc = EncoderNodes::bind(graph, model.encoder);
    benchmark::DoNotOptimize(graph.value(encode(graph, enc, inst)).values().data());
  }
}
BENCHMARK(BM_EncoderForward)->Arg(16)->Arg(32)->Arg(64);

void BM_EncoderBackward(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const TrainConfig cfg = bench_config();
  const Vocab vocab = make_vocab();
  std::mt19937_64 rng(2);
  const Model model = Model::init(vocab.size(), cfg);
  const EncodedInstance inst =
      encode_instance(random_instance(rng, length, "r"), vocab, cfg.dims.max_length);
  for (auto _ : state) {
    Graph graph;
    const EncoderNodes enc = EncoderNodes::bind(graph, model.encoder);
    const Gradients grads = graph.backward(graph.sum(encode(graph, enc, inst)));
    benchmark::DoNotOptimize(&grads);
  }
}
BENCHMARK(BM_EncoderBackward)->Arg(16)->Arg(32)->Arg(64);

void BM_EpisodeStep(benchmark::State& state) {
  TrainConfig cfg = bench_config();
  cfg.dims.max_length = 32;
  cfg.dims.hidden_dim = static_cast<std::size_t>(state.range(0));
  const Vocab vocab = make_vocab();
  std::mt19937_64 gen(3);
  Dataset data;
  for (std::size_t c = 0; c < 10; ++c) {
    for (std::size_t i = 0; i < 20; ++i) data.add(random_instance(gen, 20, "rel" + std::to_string(c)));
  }
  const EncodedDataset pool = encode_dataset(data, vocab, cfg.dims.max_length);
  const Model model = Model::init(vocab.size(), cfg);
  Rng rng = episode_rng(cfg.seed);
  for (auto _ : state) {
    const Episode episode = sample_episode(pool, cfg.episode_shape(), rng);
    Graph graph;
    const EpisodeOutcome out = run_episode(graph, episode, model);
    const Gradients grads = graph.backward(out.slow_loss);
    benchmark::DoNotOptimize(&grads);
  }
}
BENCHMARK(BM_EpisodeStep)->Arg(64)->Arg(230)->Unit(benchmark::kMillisecond);

void BM_LongestExactMatch(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> letter(0, 25);
  std::uniform_int_distribution<std::size_t> len(2, 6);
  EntityDictionary dict;
  for (int i = 0; i < state.range(0); ++i) {
    std::string s;
    for (std::size_t n = len(rng); n > 0; --n) s.push_back(static_cast<char>('a' + letter(rng) % 6));
    dict.add(s, "T");
  }
  std::u32string text;
  for (int i = 0; i < 400; ++i) text.push_back(static_cast<char32_t>('a' + letter(rng) % 6));
  for (auto _ : state) {
    benchmark::DoNotOptimize(longest_exact_match(text, dict));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_LongestExactMatch)->Arg(30)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
