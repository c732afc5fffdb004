#include "mick/trainer.hpp"

#include <cmath>
#include <thread>

#include <json.hpp>

#include "mick/error.hpp"
#include "mick/matching.hpp"

namespace mick {

namespace {

Rng seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kEvalStream = 2;

struct EncodedEpisode {
  std::vector<std::vector<NodeId>> support;
  std::vector<std::vector<NodeId>> query;
};

EncodedEpisode encode_episode(Graph& graph, const EncoderNodes& enc, const Episode& ep) {
  EncodedEpisode out;
  for (std::size_t slot = 0; slot < ep.way(); ++slot) {
    auto& s = out.support.emplace_back();
    for (const auto& inst : ep.support[slot]) s.push_back(encode(graph, enc, inst));
    auto& q = out.query.emplace_back();
    for (const auto& inst : ep.query[slot]) q.push_back(encode(graph, enc, inst));
  }
  return out;
}

double query_accuracy(Graph& graph, const EncodedEpisode& encoded, const PrototypeSet& protos) {
  std::size_t correct = 0, total = 0;
  for (std::size_t slot = 0; slot < encoded.query.size(); ++slot) {
    for (NodeId q : encoded.query[slot]) {
      correct += match_query(graph, q, protos).predicted == slot ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

double support_dispersion(const Graph& graph, const EncodedEpisode& encoded,
                          const PrototypeSet& protos) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t slot = 0; slot < encoded.support.size(); ++slot) {
    const Tensor& center = graph.value(protos.vectors[slot]);
    for (NodeId s : encoded.support[slot]) {
      const Tensor& v = graph.value(s);
      for (std::size_t i = 0; i < v.size(); ++i) total += (v[i] - center[i]) * (v[i] - center[i]);
      ++count;
    }
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace

void TrainConfig::validate() const {
  const auto positive = [](std::size_t v, const char* key) {
    if (v == 0) throw ValidationError(std::string(key) + " must be at least 1");
  };
  positive(n_train, "n_train");
  positive(k_train, "k_train");
  positive(query, "query");
  positive(epsilon, "epsilon");
  positive(dims.max_length, "max_length");
  positive(dims.word_dim, "word_dim");
  positive(dims.pos_dim, "pos_dim");
  positive(dims.hidden_dim, "hidden_dim");
  positive(dims.window, "window");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be positive");
  if (total_episodes() == 0) throw ValidationError("at least one training episode is required");
}

Model Model::init(std::size_t vocab_size, const TrainConfig& cfg) {
  Rng rng = seeded(cfg.seed, kInitStream);
  Model m;
  m.encoder = EncoderParams::init(vocab_size, cfg.dims, rng);
  m.classifier = ClassifierParams::zeros(cfg.n_train, cfg.dims.hidden_dim);
  return m;
}

std::vector<Parameter*> Model::slow_parameters() {
  const auto p = encoder.parameters();
  return {p.begin(), p.end()};
}

std::vector<Parameter*> Model::fast_parameters() {
  const auto p = classifier.parameters();
  return {p.begin(), p.end()};
}

std::vector<const Parameter*> Model::all_parameters() const {
  std::vector<const Parameter*> out;
  for (const Parameter* p : encoder.parameters()) out.push_back(p);
  for (const Parameter* p : classifier.parameters()) out.push_back(p);
  return out;
}

Phase phase_of(std::size_t episode_index, const TrainConfig& cfg) noexcept {
  if (episode_index < cfg.phase1) return Phase::kOriginal;
  if (episode_index < cfg.phase1 + cfg.phase2) return Phase::kEnriched;
  return Phase::kReview;
}

EpisodeOutcome run_episode(Graph& graph, const Episode& episode, const Model& model) {
  if (episode.way() != model.classifier.way()) {
    throw ValidationError("episode is " + std::to_string(episode.way()) +
                          "-way but the support classifier is " +
                          std::to_string(model.classifier.way()) + "-way");
  }
  EpisodeOutcome out;
  out.encoder = EncoderNodes::bind(graph, model.encoder);
  out.classifier = ClassifierNodes::bind(graph, model.classifier);

  const EncodedEpisode encoded = encode_episode(graph, out.encoder, episode);
  out.support_loss = support_loss(graph, out.classifier, encoded.support);
  const PrototypeSet protos = compute_prototypes(graph, encoded.support, episode.class_labels);
  out.match_loss = mick::match_loss(graph, encoded.query, protos);
  out.slow_loss = graph.add(out.support_loss, out.match_loss);
  out.accuracy = query_accuracy(graph, encoded, protos);
  out.dispersion = support_dispersion(graph, encoded, protos);
  return out;
}

void fast_step(TrainState& state, Model& model, const GradientMap& fast_gradient, double alpha) {
  const auto params = model.fast_parameters();
  sgd_update(params, fast_gradient, alpha);
  ++state.fast_update_count;
}

void accumulate_slow(TrainState& state, double slow_loss, const GradientMap& encoder_gradient) {
  for (const auto& [name, grad] : encoder_gradient) {
    auto [it, fresh] = state.slow_gradient.try_emplace(name, grad);
    if (!fresh) it->second.add_scaled(grad);
  }
  state.accumulated_slow_loss += slow_loss;
  ++state.accumulated_episodes;
}

void slow_step(TrainState& state, Model& model, const TrainConfig& cfg) {
  if (state.accumulated_episodes != cfg.epsilon) {
    throw ValidationError("slow step after " + std::to_string(state.accumulated_episodes) +
                          " accumulated episodes, expected " + std::to_string(cfg.epsilon));
  }
  const auto params = model.slow_parameters();
  sgd_update(params, state.slow_gradient, cfg.beta);
  state.slow_gradient.clear();
  state.accumulated_slow_loss = 0.0;
  state.accumulated_episodes = 0;
  ++state.slow_update_count;
}

TrainState train(const EncodedDataset& original, const EncodedDataset* cross,
                 const TrainConfig& cfg_in, Model& model, const EpisodeObserver& observer) {
  TrainConfig cfg = cfg_in;
  if (cross == nullptr || cross->class_count() == 0) cfg.phase2 = 0;
  cfg.validate();
  if (model.classifier.way() != cfg.n_train) {
    throw ValidationError("model classifier way does not match n_train");
  }

  const EpisodeShape shape = cfg.episode_shape();
  const EncodedDataset mixed = cfg.phase2 > 0 ? merge_pools(original, *cross) : EncodedDataset{};
  Rng rng = episode_rng(cfg.seed);

  TrainState state;
  state.metrics.reserve(cfg.total_episodes());
  for (std::size_t e = 0; e < cfg.total_episodes(); ++e) {
    const Phase phase = phase_of(e, cfg);
    const EncodedDataset& pool = phase == Phase::kEnriched ? mixed : original;
    const Episode episode = sample_episode(pool, shape, rng);

    if (cfg.reset_fast_each_episode) {
      model.classifier = ClassifierParams::zeros(cfg.n_train, cfg.dims.hidden_dim);
    }

    Graph graph;
    const EpisodeOutcome out = run_episode(graph, episode, model);
    // L_match does not depend on the classifier, so the classifier gradient
    // of L_sup + L_match is exactly the gradient of L_fast = L_sup.
    const Gradients grads = graph.backward(out.slow_loss);

    GradientMap fast_grad, slow_grad;
    out.classifier.collect(grads, fast_grad, model.classifier);
    out.encoder.collect(grads, slow_grad, model.encoder);

    EpisodeMetrics m;
    m.episode = e + 1;
    m.phase = phase;
    m.support_loss = graph.value(out.support_loss).item();
    m.match_loss = graph.value(out.match_loss).item();
    m.accuracy = out.accuracy;
    m.dispersion = out.dispersion;
    for (Origin o : episode.class_origins) m.cross_domain_classes += o == Origin::kCrossDomain;

    accumulate_slow(state, graph.value(out.slow_loss).item(), slow_grad);
    fast_step(state, model, fast_grad, cfg.alpha);
    ++state.episode_counter;
    if (state.accumulated_episodes == cfg.epsilon) {
      slow_step(state, model, cfg);
      m.slow_step = true;
    }
    state.metrics.push_back(m);
    if (observer) observer(state, m, model);
  }
  return state;
}

Rng episode_rng(std::uint64_t seed) { return seeded(seed, kSampleStream); }

Rng task_rng(std::uint64_t seed, std::size_t task) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(kEvalStream), static_cast<std::uint32_t>(task),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(task) >> 32)};
  return Rng(seq);
}

EvalReport evaluate(const EncodedDataset& test, const EncoderParams& encoder,
                    const EpisodeShape& shape, std::size_t tasks, std::uint64_t seed,
                    std::size_t threads) {
  if (tasks == 0) throw ValidationError("evaluation needs at least one task");
  if (shape.query == 0) throw ValidationError("evaluation needs at least one query per class");
  {
    // Surface data problems before spawning workers.
    Rng probe = task_rng(seed, 0);
    draw_episode(test, shape, probe);
  }

  EvalReport report;
  report.tasks = tasks;
  report.shape = shape;
  report.seed = seed;
  report.task_accuracy.assign(tasks, 0.0);

  const auto run = [&](std::size_t worker, std::size_t stride) {
    for (std::size_t t = worker; t < tasks; t += stride) {
      Rng rng = task_rng(seed, t);
      const Episode ep = sample_episode(test, shape, rng);
      Graph graph;
      const EncoderNodes enc = EncoderNodes::bind(graph, encoder);
      const EncodedEpisode encoded = encode_episode(graph, enc, ep);
      const PrototypeSet protos = compute_prototypes(graph, encoded.support);
      report.task_accuracy[t] = query_accuracy(graph, encoded, protos);
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, tasks));
  if (threads == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(run, w, threads);
  }

  double sum = 0.0;
  for (double a : report.task_accuracy) sum += a;
  report.mean_accuracy = sum / static_cast<double>(tasks);
  double var = 0.0;
  for (double a : report.task_accuracy) var += (a - report.mean_accuracy) * (a - report.mean_accuracy);
  report.std_accuracy = std::sqrt(var / static_cast<double>(tasks));
  return report;
}

std::string format_metrics_record(const EpisodeMetrics& m) {
  nlohmann::ordered_json j;
  j["episode"] = m.episode;
  j["phase"] = static_cast<int>(m.phase);
  j["l_sup"] = m.support_loss;
  j["l_match"] = m.match_loss;
  j["accuracy"] = m.accuracy;
  j["dispersion"] = m.dispersion;
  j["cross_domain_classes"] = m.cross_domain_classes;
  j["slow_step"] = m.slow_step;
  return j.dump();
}

}  // namespace mick
