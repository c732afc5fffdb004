#include "mick/align.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include <json.hpp>

#include "mick/error.hpp"
#include "mick/utf8.hpp"

namespace mick {

EntityDictionary::EntityDictionary() : nodes_(1) {}

bool EntityDictionary::add(std::string_view surface, std::string_view type) {
  const std::u32string cps = utf8::decode(surface);
  if (cps.empty()) throw ValidationError("dictionary surface must be non-empty");
  std::uint32_t at = 0;
  for (char32_t c : cps) {
    auto it = nodes_[at].next.find(c);
    if (it == nodes_[at].next.end()) {
      const auto fresh = static_cast<std::uint32_t>(nodes_.size());
      nodes_[at].next.emplace(c, fresh);
      nodes_.emplace_back();
      at = fresh;
    } else {
      at = it->second;
    }
  }
  const bool inserted = nodes_[at].types.emplace(type).second;
  entries_ += inserted ? 1 : 0;
  return inserted;
}

const EntityDictionary::TrieNode* EntityDictionary::find(std::u32string_view surface) const {
  std::uint32_t at = 0;
  for (char32_t c : surface) {
    auto it = nodes_[at].next.find(c);
    if (it == nodes_[at].next.end()) return nullptr;
    at = it->second;
  }
  return &nodes_[at];
}

bool EntityDictionary::contains(std::u32string_view surface) const {
  const TrieNode* n = surface.empty() ? nullptr : find(surface);
  return n != nullptr && !n->types.empty();
}

std::vector<std::string> EntityDictionary::types(std::u32string_view surface) const {
  const TrieNode* n = surface.empty() ? nullptr : find(surface);
  if (n == nullptr) return {};
  return {n->types.begin(), n->types.end()};
}

std::vector<std::size_t> EntityDictionary::match_lengths(std::u32string_view text,
                                                         std::size_t start) const {
  std::vector<std::size_t> out;
  std::uint32_t at = 0;
  for (std::size_t i = start; i < text.size(); ++i) {
    auto it = nodes_[at].next.find(text[i]);
    if (it == nodes_[at].next.end()) break;
    at = it->second;
    if (!nodes_[at].types.empty()) out.push_back(i - start + 1);
  }
  return out;
}

EntityDictionary read_dictionary(std::istream& in) {
  EntityDictionary dict;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(n, "expected 'surface<TAB>type'");
    const std::string_view surface(line.data(), tab);
    const std::string_view type = std::string_view(line).substr(tab + 1);
    if (surface.empty()) throw ParseError(n, "empty surface");
    if (type.empty() || type.find('\t') != std::string_view::npos) {
      throw ParseError(n, "expected exactly one non-empty type after the tab");
    }
    try {
      dict.add(surface, type);
    } catch (const ValidationError& e) {
      throw ParseError(n, e.what());
    }
  }
  if (in.bad()) throw IoError("dictionary read failure after line " + std::to_string(n));
  return dict;
}

EntityDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_dictionary(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.what());
  }
}

std::vector<MatchSpan> longest_exact_match(std::u32string_view text, const EntityDictionary& dict) {
  // A match (i, l) is strictly contained in another match iff a longer match
  // starts at i, or some match starting before i ends at or after i + l.
  std::vector<MatchSpan> out;
  std::size_t furthest_end = 0;  // max end over matches starting before i
  bool any_before = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto lengths = dict.match_lengths(text, i);
    if (!lengths.empty()) {
      const std::size_t l = lengths.back();
      if (!any_before || furthest_end < i + l) out.push_back({i, l});
      if (!any_before || i + l > furthest_end) furthest_end = i + l;
      any_before = true;
    }
  }
  return out;
}

namespace {

EntityMention mention(std::u32string_view text, const MatchSpan& span,
                      const EntityDictionary& dict) {
  EntityMention m;
  m.start = span.start;
  m.length = span.length;
  const std::u32string_view surface = text.substr(span.start, span.length);
  m.surface = utf8::encode(surface);
  for (const auto& t : dict.types(surface)) {
    if (!m.type.empty()) m.type += "|";
    m.type += t;
  }
  return m;
}

}  // namespace

std::vector<CandidateSentence> candidates_for_sentence(std::u32string_view text,
                                                       const EntityDictionary& dict,
                                                       std::size_t line, AlignSummary& summary) {
  ++summary.sentences;
  const std::vector<MatchSpan> spans = longest_exact_match(text, dict);
  std::vector<CandidateSentence> out;
  if (spans.size() < 2) {
    ++summary.dropped_sentences;
    return out;
  }
  const bool multi = spans.size() > 2;
  for (std::size_t a = 0; a < spans.size(); ++a) {
    for (std::size_t b = a + 1; b < spans.size(); ++b) {
      if (spans[a].overlaps(spans[b])) {
        ++summary.overlapping_pairs;
        continue;
      }
      CandidateSentence c;
      c.text = std::u32string(text);
      c.head = mention(text, spans[a], dict);
      c.tail = mention(text, spans[b], dict);
      c.line = line;
      c.multi_pair = multi;
      c.same_surface = c.head.surface == c.tail.surface;
      out.push_back(std::move(c));
    }
  }
  if (multi) ++summary.multi_pair_sentences;
  if (out.empty()) {
    ++summary.dropped_sentences;
  } else {
    ++summary.kept_sentences;
  }
  summary.candidates += out.size();
  return out;
}

std::vector<CandidateSentence> extract_candidates(std::istream& corpus,
                                                  const EntityDictionary& dict,
                                                  AlignSummary& summary) {
  std::vector<CandidateSentence> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(corpus, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::u32string text;
    try {
      text = utf8::decode(line);
    } catch (const ValidationError& e) {
      throw ParseError(n, e.what());
    }
    auto found = candidates_for_sentence(text, dict, n, summary);
    std::move(found.begin(), found.end(), std::back_inserter(out));
  }
  if (corpus.bad()) throw IoError("corpus read failure after line " + std::to_string(n));
  return out;
}

bool segmentation_filter(const CandidateSentence& cand, std::span<const std::u32string> words) {
  std::vector<std::size_t> boundaries{0};
  std::u32string joined;
  for (const auto& w : words) {
    joined += w;
    boundaries.push_back(joined.size());
  }
  if (joined != cand.text) {
    throw ValidationError("segmentation does not reconstruct the sentence");
  }
  const auto on_boundary = [&](std::size_t pos) {
    return std::binary_search(boundaries.begin(), boundaries.end(), pos);
  };
  for (const EntityMention* m : {&cand.head, &cand.tail}) {
    if (!on_boundary(m->start) || !on_boundary(m->start + m->length)) return false;
  }
  return true;
}

std::vector<std::u32string> parse_segmentation(std::string_view line) {
  std::vector<std::u32string> words;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto next = line.find(' ', pos);
    const auto end = next == std::string_view::npos ? line.size() : next;
    if (end > pos) words.push_back(utf8::decode(line.substr(pos, end - pos)));
    pos = end + 1;
  }
  return words;
}

Instance to_instance(const CandidateSentence& cand) {
  Instance inst;
  inst.tokens.reserve(cand.text.size());
  for (char32_t c : cand.text) inst.tokens.push_back(utf8::encode(std::u32string_view(&c, 1)));
  inst.head = {cand.head.start, cand.head.start + cand.head.length};
  inst.tail = {cand.tail.start, cand.tail.start + cand.tail.length};
  inst.relation = std::string(kUnlabeled);
  return inst;
}

std::string format_candidate(const CandidateSentence& cand) {
  const Instance inst = to_instance(cand);
  nlohmann::ordered_json j;
  j["tokens"] = inst.tokens;
  j["head"] = {inst.head.start, inst.head.end};
  j["tail"] = {inst.tail.start, inst.tail.end};
  j["relation"] = inst.relation;
  j["head_type"] = cand.head.type;
  j["tail_type"] = cand.tail.type;
  j["provenance"] = {{"line", cand.line},
                     {"multi_pair", cand.multi_pair},
                     {"same_surface", cand.same_surface}};
  return j.dump();
}

}  // namespace mick
