#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mick/encoder.hpp"
#include "mick/episode.hpp"
#include "mick/graph.hpp"
#include "mick/optim.hpp"
#include "mick/support_classifier.hpp"
#include "mick/vocab.hpp"

namespace mick {

struct TrainConfig {
  // Training task shape.
  std::size_t n_train = 5;
  std::size_t k_train = 5;
  std::size_t query = 5;

  double alpha = 0.1;        // fast learner rate (support classifier)
  double beta = 0.1;         // slow learner rate (encoder)
  std::size_t epsilon = 5;   // episodes per slow step

  // Episodes in each enrichment phase: original, original + cross-domain,
  // original again.
  std::size_t phase1 = 1000;
  std::size_t phase2 = 1000;
  std::size_t phase3 = 1000;

  EncoderDims dims;
  std::uint64_t seed = 1;
  VocabMode vocab_mode = VocabMode::kWord;

  // Zero the classifier before every episode instead of keeping it across
  // episodes.
  bool reset_fast_each_episode = false;

  std::size_t total_episodes() const noexcept { return phase1 + phase2 + phase3; }
  EpisodeShape episode_shape() const noexcept { return {n_train, k_train, query}; }

  // Throws ValidationError naming the offending key.
  void validate() const;
};

struct Model {
  EncoderParams encoder;
  ClassifierParams classifier;

  static Model init(std::size_t vocab_size, const TrainConfig& cfg);

  std::vector<Parameter*> slow_parameters();
  std::vector<Parameter*> fast_parameters();
  std::vector<const Parameter*> all_parameters() const;
};

enum class Phase : std::uint8_t { kOriginal = 1, kEnriched = 2, kReview = 3 };

Phase phase_of(std::size_t episode_index, const TrainConfig& cfg) noexcept;

struct EpisodeMetrics {
  std::size_t episode = 0;  // 1-based
  Phase phase = Phase::kOriginal;
  double support_loss = 0.0;
  double match_loss = 0.0;
  double accuracy = 0.0;
  double dispersion = 0.0;
  std::size_t cross_domain_classes = 0;
  bool slow_step = false;
};

struct TrainState {
  std::size_t episode_counter = 0;
  std::size_t fast_update_count = 0;
  std::size_t slow_update_count = 0;

  // Running sum of L_sup + L_match since the last slow step, and the
  // matching sum of encoder gradients.
  double accumulated_slow_loss = 0.0;
  std::size_t accumulated_episodes = 0;
  GradientMap slow_gradient;

  std::vector<EpisodeMetrics> metrics;
};

/// Everything one episode records into a graph.
struct EpisodeOutcome {
  EncoderNodes encoder;
  ClassifierNodes classifier;
  NodeId support_loss;  // L_sup, also the fast loss
  NodeId match_loss;    // L_match
  NodeId slow_loss;     // L_sup + L_match, this episode's contribution to L_slow
  double accuracy = 0.0;
  double dispersion = 0.0;  // mean squared distance of support vectors to their prototype
};

/// Encodes every support and query instance once, then records L_sup over
/// the support set and prototypes plus L_match over the queries.
EpisodeOutcome run_episode(Graph& graph, const Episode& episode, const Model& model);

/// W, b <- W, b - alpha * grad. Encoder untouched.
void fast_step(TrainState& state, Model& model, const GradientMap& fast_gradient, double alpha);

/// Adds one episode's loss and encoder gradient to the slow accumulator.
void accumulate_slow(TrainState& state, double slow_loss, const GradientMap& encoder_gradient);

/// Encoder <- encoder - beta * (sum of accumulated gradients), then resets
/// the accumulator. Throws ValidationError unless exactly `epsilon` episodes
/// have been accumulated.
void slow_step(TrainState& state, Model& model, const TrainConfig& cfg);

using EpisodeObserver =
    std::function<void(const TrainState&, const EpisodeMetrics&, const Model&)>;

/// Runs phase1 + phase2 + phase3 episodes. Phase-2 episodes draw classes
/// from the union of original and cross-domain classes; without a
/// cross-domain pool phase 2 is skipped. A fast step follows every episode
/// and a slow step every `epsilon` episodes; a partial accumulation at the
/// end of the run is discarded.
TrainState train(const EncodedDataset& original, const EncodedDataset* cross,
                 const TrainConfig& cfg, Model& model, const EpisodeObserver& observer = {});

struct EvalReport {
  std::size_t tasks = 0;
  EpisodeShape shape;
  std::uint64_t seed = 0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> task_accuracy;
};

/// Few-shot evaluation with the encoder and nearest-prototype matching only.
/// Task i samples from a generator seeded by (seed, i), so the result does
/// not depend on `threads`.
EvalReport evaluate(const EncodedDataset& test, const EncoderParams& encoder,
                    const EpisodeShape& shape, std::size_t tasks, std::uint64_t seed,
                    std::size_t threads = 1);

// Per-task generator used by evaluate.
Rng task_rng(std::uint64_t seed, std::size_t task);

// Generator train draws its episodes from.
Rng episode_rng(std::uint64_t seed);

std::string format_metrics_record(const EpisodeMetrics& m);

}  // namespace mick
