#include "mick/vocab.hpp"

#include <algorithm>
#include <set>

#include "mick/error.hpp"
#include "mick/utf8.hpp"

namespace mick {

namespace {
const std::string kPadToken = "<pad>";
const std::string kUnkToken = "<unk>";
}  // namespace

const char* to_string(VocabMode mode) noexcept { return mode == VocabMode::kChar ? "char" : "word"; }

VocabMode parse_vocab_mode(std::string_view text) {
  if (text == "word") return VocabMode::kWord;
  if (text == "char") return VocabMode::kChar;
  throw ValidationError("vocabulary mode must be 'word' or 'char', got '" + std::string(text) + "'");
}

Vocab::Vocab(VocabMode mode, std::vector<std::string> tokens) : mode_(mode), tokens_(std::move(tokens)) {
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<std::uint32_t>(i + 2)).second) {
      throw ValidationError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

std::uint32_t Vocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(std::uint32_t id) const {
  if (id == kPad) return kPadToken;
  if (id == kUnk) return kUnkToken;
  if (id - 2 >= tokens_.size()) throw ValidationError("token id " + std::to_string(id) + " out of range");
  return tokens_[id - 2];
}

Vocab build_vocab(std::span<const Dataset* const> datasets, VocabMode mode) {
  std::set<std::string> seen;
  bool any = false;
  for (const Dataset* data : datasets) {
    for (const auto& [_, group] : data->groups) {
      for (const Instance& inst : group) {
        any = true;
        for (const std::string& tok : inst.tokens) {
          if (mode == VocabMode::kChar) {
            for (auto& ch : utf8::split_chars(tok)) seen.insert(std::move(ch));
          } else {
            seen.insert(tok);
          }
        }
      }
    }
  }
  if (!any) throw ValidationError("cannot build a vocabulary from zero instances");
  return Vocab(mode, std::vector<std::string>(seen.begin(), seen.end()));
}

Instance explode_chars(const Instance& inst) {
  Instance out;
  out.relation = inst.relation;
  std::vector<std::size_t> offset(inst.tokens.size() + 1, 0);
  for (std::size_t i = 0; i < inst.tokens.size(); ++i) {
    auto chars = utf8::split_chars(inst.tokens[i]);
    offset[i + 1] = offset[i] + chars.size();
    for (auto& c : chars) out.tokens.push_back(std::move(c));
  }
  out.head = {offset[inst.head.start], offset[inst.head.end]};
  out.tail = {offset[inst.tail.start], offset[inst.tail.end]};
  return out;
}

}  // namespace mick
