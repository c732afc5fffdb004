#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mick/data.hpp"

namespace mick {

/// Surface forms with entity types, indexed by a code-point trie so that
/// every dictionary entry starting at a given position can be enumerated in
/// one walk. Matching is exact and case-sensitive.
class EntityDictionary {
 public:
  EntityDictionary();

  // Returns false if the (surface, type) pair was already present.
  bool add(std::string_view surface, std::string_view type);

  bool contains(std::u32string_view surface) const;
  // Types registered for `surface`, sorted; empty when absent.
  std::vector<std::string> types(std::u32string_view surface) const;
  std::size_t size() const noexcept { return entries_; }

  // Lengths l such that text[start, start + l) is an entry, ascending.
  std::vector<std::size_t> match_lengths(std::u32string_view text, std::size_t start) const;

 private:
  struct TrieNode {
    std::map<char32_t, std::uint32_t> next;
    std::set<std::string> types;
  };
  const TrieNode* find(std::u32string_view surface) const;

  std::vector<TrieNode> nodes_;
  std::size_t entries_ = 0;
};

// One "surface<TAB>type" entry per line. Blank lines are skipped.
EntityDictionary read_dictionary(std::istream& in);
EntityDictionary load_dictionary(const std::filesystem::path& path);

/// Substring text[start, start + length) in code points.
struct MatchSpan {
  std::size_t start = 0;
  std::size_t length = 0;

  std::size_t end() const noexcept { return start + length; }
  bool contains(const MatchSpan& o) const noexcept {
    return start <= o.start && o.end() <= end();
  }
  bool overlaps(const MatchSpan& o) const noexcept { return start < o.end() && o.start < end(); }
  friend auto operator<=>(const MatchSpan&, const MatchSpan&) = default;
};

/// Every dictionary match not strictly contained in another dictionary
/// match. Overlapping matches that do not contain each other are all kept.
/// Sorted by (start, length).
std::vector<MatchSpan> longest_exact_match(std::u32string_view text, const EntityDictionary& dict);

struct EntityMention {
  std::size_t start = 0;
  std::size_t length = 0;
  std::string surface;
  std::string type;  // "|"-joined when the surface has several types
};

struct CandidateSentence {
  std::u32string text;
  EntityMention head;  // the earlier span
  EntityMention tail;
  std::size_t line = 0;       // 1-based line in the corpus
  bool multi_pair = false;    // sentence had more than two longest matches
  bool same_surface = false;  // both entities share a surface at different positions
};

struct AlignSummary {
  std::size_t sentences = 0;
  std::size_t kept_sentences = 0;       // sentences yielding at least one candidate
  std::size_t dropped_sentences = 0;    // fewer than two longest matches
  std::size_t multi_pair_sentences = 0;
  std::size_t candidates = 0;
  std::size_t overlapping_pairs = 0;    // pairs skipped because the spans overlap
  std::size_t segmentation_discarded = 0;
};

/// Candidates from one sentence: one per unordered pair of non-overlapping
/// longest matches, flagged multi_pair when there were more than two.
std::vector<CandidateSentence> candidates_for_sentence(std::u32string_view text,
                                                       const EntityDictionary& dict,
                                                       std::size_t line, AlignSummary& summary);

/// Runs candidates_for_sentence over every line of `corpus`, in order.
std::vector<CandidateSentence> extract_candidates(std::istream& corpus,
                                                  const EntityDictionary& dict,
                                                  AlignSummary& summary);

/// Keep a candidate only if each entity begins and ends on a word boundary
/// of the segmentation, i.e. its surface is the concatenation of a run of
/// consecutive words at that position. Throws ValidationError when the words
/// do not concatenate to the sentence.
bool segmentation_filter(const CandidateSentence& cand, std::span<const std::u32string> words);

// Splits a space-separated segmentation line into words.
std::vector<std::u32string> parse_segmentation(std::string_view line);

/// Character-token instance with relation "UNLABELED".
Instance to_instance(const CandidateSentence& cand);
// Instance record plus entity types and provenance fields.
std::string format_candidate(const CandidateSentence& cand);

inline constexpr std::string_view kUnlabeled = "UNLABELED";

}  // namespace mick
