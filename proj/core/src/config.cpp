#include "mick/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mick/error.hpp"

namespace mick {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ValidationError("config key '" + key + "' expects a non-negative integer, got '" +
                          value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ValidationError("config key '" + key + "' expects an unsigned integer, got '" + value +
                          "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || value.empty() || !std::isfinite(out)) {
    throw ValidationError("config key '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ValidationError("config key '" + key + "' expects true/false, got '" + value + "'");
}

std::string real_to_string(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    kv[key] = value;
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_key_values(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

void apply_key_values(TrainConfig& cfg, const KeyValues& kv) {
  if (auto it = kv.find("episodes"); it != kv.end()) {
    const std::size_t total = parse_count(it->first, it->second);
    cfg.phase1 = total / 3 + (total % 3 > 0 ? 1 : 0);
    cfg.phase2 = total / 3 + (total % 3 > 1 ? 1 : 0);
    cfg.phase3 = total / 3;
  }
  for (const auto& [key, value] : kv) {
    if (key == "episodes") continue;
    if (key == "n_train") cfg.n_train = parse_count(key, value);
    else if (key == "k_train") cfg.k_train = parse_count(key, value);
    else if (key == "query") cfg.query = parse_count(key, value);
    else if (key == "alpha") cfg.alpha = parse_real(key, value);
    else if (key == "beta") cfg.beta = parse_real(key, value);
    else if (key == "epsilon") cfg.epsilon = parse_count(key, value);
    else if (key == "phase1") cfg.phase1 = parse_count(key, value);
    else if (key == "phase2") cfg.phase2 = parse_count(key, value);
    else if (key == "phase3") cfg.phase3 = parse_count(key, value);
    else if (key == "max_length") cfg.dims.max_length = parse_count(key, value);
    else if (key == "word_dim") cfg.dims.word_dim = parse_count(key, value);
    else if (key == "pos_dim") cfg.dims.pos_dim = parse_count(key, value);
    else if (key == "hidden_dim") cfg.dims.hidden_dim = parse_count(key, value);
    else if (key == "window") cfg.dims.window = parse_count(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "vocab_mode") cfg.vocab_mode = parse_vocab_mode(value);
    else if (key == "reset_fast_each_episode") cfg.reset_fast_each_episode = parse_bool(key, value);
    else throw ValidationError("unknown config key '" + key + "'");
  }
}

TrainConfig config_from_key_values(const KeyValues& kv) {
  TrainConfig cfg;
  apply_key_values(cfg, kv);
  cfg.validate();
  return cfg;
}

KeyValues config_to_key_values(const TrainConfig& cfg) {
  return {
      {"n_train", std::to_string(cfg.n_train)},
      {"k_train", std::to_string(cfg.k_train)},
      {"query", std::to_string(cfg.query)},
      {"alpha", real_to_string(cfg.alpha)},
      {"beta", real_to_string(cfg.beta)},
      {"epsilon", std::to_string(cfg.epsilon)},
      {"phase1", std::to_string(cfg.phase1)},
      {"phase2", std::to_string(cfg.phase2)},
      {"phase3", std::to_string(cfg.phase3)},
      {"max_length", std::to_string(cfg.dims.max_length)},
      {"word_dim", std::to_string(cfg.dims.word_dim)},
      {"pos_dim", std::to_string(cfg.dims.pos_dim)},
      {"hidden_dim", std::to_string(cfg.dims.hidden_dim)},
      {"window", std::to_string(cfg.dims.window)},
      {"seed", std::to_string(cfg.seed)},
      {"vocab_mode", to_string(cfg.vocab_mode)},
      {"reset_fast_each_episode", cfg.reset_fast_each_episode ? "true" : "false"},
  };
}

std::string format_config(const TrainConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_to_key_values(cfg)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace mick
