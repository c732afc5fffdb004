#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mick/align.hpp"
#include "mick/checkpoint.hpp"
#include "mick/config.hpp"
#include "mick/data.hpp"
#include "mick/error.hpp"
#include "mick/trainer.hpp"
#include "mick/utf8.hpp"
#include "mick/vocab.hpp"

namespace mick::cli {

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

KeyValues parse_overrides(const std::vector<std::string>& overrides) {
  KeyValues kv;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("override '" + o + "' must look like key=value");
    }
    kv[o.substr(0, eq)] = o.substr(eq + 1);
  }
  return kv;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

int cmd_train(const TrainOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    TrainConfig cfg;
    if (opts.config) apply_key_values(cfg, load_key_values(*opts.config));
    apply_key_values(cfg, parse_overrides(opts.overrides));
    cfg.validate();

    const Dataset train = load_dataset(opts.train, Origin::kOriginal);
    const Dataset test = load_dataset(opts.test, Origin::kOriginal);
    require_disjoint(train, test);
    std::optional<Dataset> cross;
    if (opts.cross) cross = load_dataset(*opts.cross, Origin::kCrossDomain);

    std::vector<const Dataset*> sources{&train};
    if (cross) sources.push_back(&*cross);
    if (opts.vocab_include_test) sources.push_back(&test);
    const Vocab vocab = build_vocab(sources, cfg.vocab_mode);

    const EncodedDataset original = encode_dataset(train, vocab, cfg.dims.max_length);
    std::optional<EncodedDataset> cross_pool;
    if (cross) cross_pool = encode_dataset(*cross, vocab, cfg.dims.max_length);
    if (!cross_pool && cfg.phase2 > 0) {
      err << "note: no cross-domain data, skipping " << cfg.phase2 << " enrichment episodes\n";
    }

    std::ofstream metrics = open_output(opts.metrics);
    {
      nlohmann::ordered_json header;
      for (const auto& [k, v] : config_to_key_values(cfg)) header["config"][k] = v;
      header["vocab_size"] = vocab.size();
      metrics << header.dump() << '\n';
    }
    Model model = Model::init(vocab.size(), cfg);
    const TrainState state =
        mick::train(original, cross_pool ? &*cross_pool : nullptr, cfg, model,
              [&](const TrainState&, const EpisodeMetrics& m, const Model&) {
                metrics << format_metrics_record(m) << '\n';
              });
    metrics.flush();
    if (!metrics) throw IoError("write failure on " + opts.metrics.string());

    save_checkpoint(opts.checkpoint, make_checkpoint(model, cfg, vocab));
    out << "episodes: " << state.episode_counter << '\n'
        << "fast updates: " << state.fast_update_count << '\n'
        << "slow updates: " << state.slow_update_count << '\n'
        << "vocabulary: " << vocab.size() << '\n'
        << "checkpoint: " << opts.checkpoint.string() << '\n'
        << "metrics: " << opts.metrics.string() << '\n';
    return kExitOk;
  });
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Checkpoint ckpt = load_checkpoint(opts.checkpoint);
    const Model model = model_from_checkpoint(ckpt);
    const Dataset test = load_dataset(opts.test, Origin::kOriginal);
    const EncodedDataset pool = encode_dataset(test, ckpt.vocab, ckpt.config.dims.max_length);
    const EpisodeShape shape{opts.way, opts.shot, opts.query};
    const EvalReport report = evaluate(pool, model.encoder, shape, opts.tasks, opts.seed, opts.threads);

    std::filesystem::path report_path = opts.report.value_or(
        std::filesystem::path(opts.checkpoint.string() + ".eval.json"));
    nlohmann::ordered_json j;
    j["tasks"] = report.tasks;
    j["way"] = shape.way;
    j["shot"] = shape.shot;
    j["query"] = shape.query;
    j["seed"] = report.seed;
    j["mean_accuracy"] = report.mean_accuracy;
    j["std_accuracy"] = report.std_accuracy;
    for (const auto& [k, v] : config_to_key_values(ckpt.config)) j["config"][k] = v;
    std::ofstream file = open_output(report_path);
    file << j.dump(2) << '\n';
    if (!file) throw IoError("write failure on " + report_path.string());

    out << shape.way << "-way " << shape.shot << "-shot, " << shape.query
        << " queries per class, " << report.tasks << " tasks, seed " << report.seed << '\n'
        << "accuracy: " << fixed(report.mean_accuracy, 4) << " +- "
        << fixed(report.std_accuracy, 4) << '\n'
        << format_config(ckpt.config) << "report: " << report_path.string() << '\n';
    return kExitOk;
  });
}

int cmd_align(const AlignOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const EntityDictionary dict = load_dictionary(opts.dictionary);
    std::ifstream corpus(opts.corpus);
    if (!corpus) throw IoError("cannot open " + opts.corpus.string());
    std::ifstream segmentation;
    if (opts.segmentation) {
      segmentation.open(*opts.segmentation);
      if (!segmentation) throw IoError("cannot open " + opts.segmentation->string());
    }
    std::ofstream sink = open_output(opts.out);

    AlignSummary summary;
    std::string line, seg_line;
    std::size_t n = 0;
    while (std::getline(corpus, line)) {
      ++n;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::vector<std::u32string> words;
      if (opts.segmentation) {
        if (!std::getline(segmentation, seg_line)) {
          throw ValidationError("segmentation file ends before corpus line " + std::to_string(n));
        }
        if (!seg_line.empty() && seg_line.back() == '\r') seg_line.pop_back();
        words = parse_segmentation(seg_line);
      }
      std::u32string text;
      try {
        text = utf8::decode(line);
      } catch (const ValidationError& e) {
        throw ParseError(n, opts.corpus.string() + ": " + e.what());
      }
      for (const CandidateSentence& c : candidates_for_sentence(text, dict, n, summary)) {
        if (opts.segmentation) {
          bool keep = false;
          try {
            keep = segmentation_filter(c, words);
          } catch (const ValidationError& e) {
            throw ParseError(n, opts.segmentation->string() + ": " + e.what());
          }
          if (!keep) {
            ++summary.segmentation_discarded;
            --summary.candidates;
            continue;
          }
        }
        sink << format_candidate(c) << '\n';
      }
    }
    if (corpus.bad()) throw IoError("read failure on " + opts.corpus.string());
    sink.flush();
    if (!sink) throw IoError("write failure on " + opts.out.string());

    out << "sentences: " << summary.sentences << '\n'
        << "kept: " << summary.kept_sentences << '\n'
        << "dropped: " << summary.dropped_sentences << '\n'
        << "multi-pair: " << summary.multi_pair_sentences << '\n'
        << "overlapping pairs skipped: " << summary.overlapping_pairs << '\n'
        << "segmentation discarded: " << summary.segmentation_discarded << '\n'
        << "candidates: " << summary.candidates << '\n';
    return kExitOk;
  });
}

int cmd_stats(const StatsOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.data.empty()) throw ValidationError("stats needs at least one dataset");
    std::vector<DatasetStats> rows;
    for (const auto& path : opts.data) {
      rows.push_back(dataset_stats(load_dataset(path, Origin::kOriginal), path.stem().string()));
    }
    out << format_stats_table(rows);
    return kExitOk;
  });
}

int cmd_sample_episode(const SampleOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Dataset data = load_dataset(opts.data, Origin::kOriginal);
    const std::array<const Dataset*, 1> sources{&data};
    const Vocab vocab = build_vocab(sources, parse_vocab_mode(opts.vocab_mode));
    const EncodedDataset pool = encode_dataset(data, vocab, opts.max_length);
    Rng rng(opts.seed);
    const Episode ep = sample_episode(pool, {opts.way, opts.shot, opts.query}, rng);

    const auto dump = [&](const EncodedInstance& inst) {
      nlohmann::ordered_json j;
      std::vector<std::string> tokens;
      for (std::size_t i = 0; i < inst.true_length; ++i) tokens.push_back(vocab.token(inst.token_ids[i]));
      j["slot"] = inst.relation_slot;
      j["tokens"] = tokens;
      j["pos_head"] = std::vector<std::uint32_t>(inst.pos_head.begin(),
                                                 inst.pos_head.begin() + static_cast<std::ptrdiff_t>(inst.true_length));
      j["pos_tail"] = std::vector<std::uint32_t>(inst.pos_tail.begin(),
                                                 inst.pos_tail.begin() + static_cast<std::ptrdiff_t>(inst.true_length));
      return j;
    };
    nlohmann::ordered_json j;
    j["seed"] = opts.seed;
    j["classes"] = ep.class_labels;
    for (std::size_t slot = 0; slot < ep.way(); ++slot) {
      for (const auto& s : ep.support[slot]) j["support"].push_back(dump(s));
      for (const auto& q : ep.query[slot]) j["query"].push_back(dump(q));
    }
    out << j.dump(2) << '\n';
    return kExitOk;
  });
}

int run(int argc, char** argv) {
  CLI::App app{"Few-shot relation classification with a support classifier and task enrichment"};
  app.require_subcommand(1);

  TrainOptions train_opts;
  std::string config_path, cross_path;
  auto* train_cmd = app.add_subcommand("train", "Meta-train an encoder and write a checkpoint");
  train_cmd->add_option("--config", config_path, "key = value config file");
  train_cmd->add_option("--train", train_opts.train, "training instances (JSON lines)")->required();
  train_cmd->add_option("--test", train_opts.test, "declared test instances")->required();
  train_cmd->add_option("--cross", cross_path, "cross-domain instances for task enrichment");
  train_cmd->add_option("--out", train_opts.checkpoint, "checkpoint path");
  train_cmd->add_option("--metrics", train_opts.metrics, "per-episode metrics log");
  train_cmd->add_option("--set", train_opts.overrides, "override a config key (key=value)");
  train_cmd->add_flag("--vocab-include-test", train_opts.vocab_include_test,
                      "also draw vocabulary from the test set");

  EvalOptions eval_opts;
  std::string report_path;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on random few-shot tasks");
  eval_cmd->add_option("--checkpoint", eval_opts.checkpoint)->required();
  eval_cmd->add_option("--test", eval_opts.test)->required();
  eval_cmd->add_option("-N,--way", eval_opts.way);
  eval_cmd->add_option("-K,--shot", eval_opts.shot);
  eval_cmd->add_option("-Q,--query", eval_opts.query);
  eval_cmd->add_option("--tasks", eval_opts.tasks);
  eval_cmd->add_option("--seed", eval_opts.seed);
  eval_cmd->add_option("--threads", eval_opts.threads);
  eval_cmd->add_option("--report", report_path, "JSON report path");

  AlignOptions align_opts;
  std::string seg_path;
  auto* align_cmd = app.add_subcommand("align", "Extract two-entity candidate sentences");
  align_cmd->add_option("--corpus", align_opts.corpus, "one sentence per line")->required();
  align_cmd->add_option("--dict", align_opts.dictionary, "surface<TAB>type per line")->required();
  align_cmd->add_option("--segmentation", seg_path, "space-separated words, one line per sentence");
  align_cmd->add_option("--out", align_opts.out);

  StatsOptions stats_opts;
  auto* stats_cmd = app.add_subcommand("stats", "Print class and instance counts");
  stats_cmd->add_option("data", stats_opts.data)->required();

  SampleOptions sample_opts;
  auto* sample_cmd = app.add_subcommand("sample-episode", "Dump one sampled episode as JSON");
  sample_cmd->add_option("--data", sample_opts.data)->required();
  sample_cmd->add_option("-N,--way", sample_opts.way);
  sample_cmd->add_option("-K,--shot", sample_opts.shot);
  sample_cmd->add_option("-Q,--query", sample_opts.query);
  sample_cmd->add_option("--max-length", sample_opts.max_length);
  sample_cmd->add_option("--vocab-mode", sample_opts.vocab_mode);
  sample_cmd->add_option("--seed", sample_opts.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (*train_cmd) {
    if (!config_path.empty()) train_opts.config = config_path;
    if (!cross_path.empty()) train_opts.cross = cross_path;
    return cmd_train(train_opts, std::cout, std::cerr);
  }
  if (*eval_cmd) {
    if (!report_path.empty()) eval_opts.report = report_path;
    return cmd_eval(eval_opts, std::cout, std::cerr);
  }
  if (*align_cmd) {
    if (!seg_path.empty()) align_opts.segmentation = seg_path;
    return cmd_align(align_opts, std::cout, std::cerr);
  }
  if (*stats_cmd) return cmd_stats(stats_opts, std::cout, std::cerr);
  if (*sample_cmd) return cmd_sample_episode(sample_opts, std::cout, std::cerr);
  return kExitInternal;
}

}  // namespace mick::cli
