#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mick/data.hpp"

namespace mick {

enum class VocabMode : std::uint8_t { kWord = 0, kChar = 1 };

const char* to_string(VocabMode mode) noexcept;
VocabMode parse_vocab_mode(std::string_view text);

/// Token id table. Id 0 is padding, id 1 stands in for unseen tokens, and
/// corpus tokens take ids from 2 upward in lexicographic order.
class Vocab {
 public:
  static constexpr std::uint32_t kPad = 0;
  static constexpr std::uint32_t kUnk = 1;

  Vocab() = default;

  // `tokens` are the corpus tokens; duplicates and reserved names are rejected.
  Vocab(VocabMode mode, std::vector<std::string> tokens);

  VocabMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return tokens_.size() + 2; }
  std::uint32_t id(std::string_view token) const;
  const std::string& token(std::uint32_t id) const;

  // Corpus tokens in id order (id 2 first).
  std::span<const std::string> corpus_tokens() const noexcept { return tokens_; }

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.mode_ == b.mode_ && a.tokens_ == b.tokens_;
  }

 private:
  VocabMode mode_ = VocabMode::kWord;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

/// Collects every distinct token of `datasets`; in character mode each token
/// is split into its unicode scalar values first.
Vocab build_vocab(std::span<const Dataset* const> datasets, VocabMode mode);

/// Character-mode view of an instance: one token per unicode scalar, spans
/// re-expressed in character offsets.
Instance explode_chars(const Instance& inst);

}  // namespace mick
