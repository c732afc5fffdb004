#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mick::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitInternal = 3;

struct TrainOptions {
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;  // "key=value", applied after the config file
  std::filesystem::path train;
  std::filesystem::path test;          // declared test set, checked for disjointness
  std::optional<std::filesystem::path> cross;
  std::filesystem::path checkpoint = "mick.ckpt";
  std::filesystem::path metrics = "metrics.jsonl";
  bool vocab_include_test = false;
};

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path test;
  std::optional<std::filesystem::path> report;  // defaults to <checkpoint>.eval.json
  std::size_t way = 5;
  std::size_t shot = 1;
  std::size_t query = 5;
  std::size_t tasks = 2000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

struct AlignOptions {
  std::filesystem::path corpus;
  std::filesystem::path dictionary;
  std::optional<std::filesystem::path> segmentation;
  std::filesystem::path out = "candidates.jsonl";
};

struct StatsOptions {
  std::vector<std::filesystem::path> data;
};

struct SampleOptions {
  std::filesystem::path data;
  std::size_t way = 5;
  std::size_t shot = 5;
  std::size_t query = 5;
  std::size_t max_length = 128;
  std::string vocab_mode = "word";
  std::uint64_t seed = 1;
};

// Each command reports to `out`/`err` and returns an exit code; library
// errors are mapped onto the codes above.
int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_align(const AlignOptions& opts, std::ostream& out, std::ostream& err);
int cmd_stats(const StatsOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sample_episode(const SampleOptions& opts, std::ostream& out, std::ostream& err);

// Full argv front end.
int run(int argc, char** argv);

}  // namespace mick::cli
