#include "mick/data.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mick/error.hpp"

namespace mick {

using nlohmann::json;

namespace {

TokenSpan parse_span(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned()) {
    throw ValidationError(std::string("field '") + field +
                          "' must be a [start, end] pair of non-negative integers");
  }
  return TokenSpan{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

std::string group_digits(std::size_t n) {
  std::string s = std::to_string(n);
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(s.size()) - 3; i > 0; i -= 3) {
    s.insert(static_cast<std::size_t>(i), ",");
  }
  return s;
}

}  // namespace

void validate(const Instance& inst) {
  const std::size_t n = inst.tokens.size();
  if (n == 0) throw ValidationError("instance has no tokens");
  for (const auto& [span, name] : {std::pair{inst.head, "head"}, std::pair{inst.tail, "tail"}}) {
    if (span.start >= span.end || span.end > n) {
      throw ValidationError(std::string(name) + " span [" + std::to_string(span.start) + ", " +
                            std::to_string(span.end) + ") invalid for " + std::to_string(n) +
                            " tokens");
    }
  }
  if (inst.head.overlaps(inst.tail)) throw ValidationError("head and tail spans overlap");
  if (inst.relation.empty()) throw ValidationError("relation label is empty");
}

std::size_t Dataset::instance_count() const noexcept {
  std::size_t total = 0;
  for (const auto& [_, v] : groups) total += v.size();
  return total;
}

std::set<std::string> Dataset::labels() const {
  std::set<std::string> out;
  for (const auto& [label, _] : groups) out.insert(label);
  return out;
}

void Dataset::add(Instance inst) {
  validate(inst);
  auto& group = groups[inst.relation];
  group.push_back(std::move(inst));
}

Instance parse_instance(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, std::string("malformed record: ") + e.what());
  }
  try {
    if (!j.is_object()) throw ValidationError("record must be an object");
    for (const char* key : {"tokens", "head", "tail", "relation"}) {
      if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
    }
    Instance inst;
    const json& tokens = j.at("tokens");
    if (!tokens.is_array()) throw ValidationError("field 'tokens' must be an array of strings");
    inst.tokens.reserve(tokens.size());
    for (const json& t : tokens) {
      if (!t.is_string()) throw ValidationError("field 'tokens' must be an array of strings");
      inst.tokens.push_back(t.get<std::string>());
    }
    inst.head = parse_span(j.at("head"), "head");
    inst.tail = parse_span(j.at("tail"), "tail");
    if (!j.at("relation").is_string()) throw ValidationError("field 'relation' must be a string");
    inst.relation = j.at("relation").get<std::string>();
    validate(inst);
    return inst;
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(line_number, e.what());
  }
}

std::string format_instance(const Instance& inst) {
  json j;
  j["tokens"] = inst.tokens;
  j["head"] = {inst.head.start, inst.head.end};
  j["tail"] = {inst.tail.start, inst.tail.end};
  j["relation"] = inst.relation;
  return j.dump();
}

Dataset read_dataset(std::istream& in, Origin origin) {
  Dataset data;
  data.origin = origin;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    data.add(parse_instance(line, line_number));
  }
  if (in.bad()) throw IoError("read failure after line " + std::to_string(line_number));
  if (data.groups.empty()) throw ValidationError("no instances");
  return data;
}

Dataset load_dataset(const std::filesystem::path& path, Origin origin) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_dataset(in, origin);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + std::string(e.what()));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [_, group] : data.groups) {
    for (const Instance& inst : group) out << format_instance(inst) << '\n';
  }
  if (!out) throw IoError("write failure on " + path.string());
}

std::set<std::string> verify_disjoint(const Dataset& train, const Dataset& test) {
  std::set<std::string> shared;
  for (const auto& [label, _] : train.groups) {
    if (test.groups.contains(label)) shared.insert(label);
  }
  return shared;
}

void require_disjoint(const Dataset& train, const Dataset& test) {
  const auto shared = verify_disjoint(train, test);
  if (shared.empty()) return;
  std::string list;
  for (const auto& label : shared) {
    if (!list.empty()) list += ", ";
    list += label;
  }
  throw ValidationError(
      "training and test relation sets must be disjoint; shared relations: {" + list + "}");
}

DatasetStats dataset_stats(const Dataset& data, std::string name) {
  DatasetStats s;
  s.name = std::move(name);
  s.classes = data.class_count();
  s.instances = data.instance_count();
  bool first = true;
  for (const auto& [_, group] : data.groups) {
    s.min_per_class = first ? group.size() : std::min(s.min_per_class, group.size());
    s.max_per_class = first ? group.size() : std::max(s.max_per_class, group.size());
    first = false;
  }
  return s;
}

std::string format_stats_table(const std::vector<DatasetStats>& rows) {
  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"Dataset", "#cls.", "#inst./cls.", "#inst."});
  for (const auto& r : rows) {
    std::string per = r.min_per_class == r.max_per_class
                          ? group_digits(r.min_per_class)
                          : group_digits(r.min_per_class) + "-" + group_digits(r.max_per_class);
    cells.push_back({r.name, group_digits(r.classes), per, group_digits(r.instances)});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  const auto rule = [&] {
    out << '+';
    for (std::size_t c = 0; c < 4; ++c) out << std::string(width[c] + 2, '-') << '+';
    out << '\n';
  };
  rule();
  for (std::size_t r = 0; r < cells.size(); ++r) {
    out << '|';
    for (std::size_t c = 0; c < 4; ++c) {
      out << ' ' << (c == 0 ? std::left : std::right) << std::setw(static_cast<int>(width[c]))
          << cells[r][c] << " |";
    }
    out << '\n';
    if (r == 0) rule();
  }
  rule();
  return out.str();
}

}  // namespace mick
