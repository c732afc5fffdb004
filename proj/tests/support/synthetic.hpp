#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mick/data.hpp"

namespace mick::testing {

// Corpus where every relation owns a few signature tokens that appear in
// fixed slots right next to its entities; everything else is shared filler.
struct SyntheticSpec {
  std::size_t vocabulary = 200;
  std::size_t train_relations = 15;
  std::size_t test_relations = 5;
  std::size_t signature_tokens = 3;
  std::size_t instances_per_class = 40;
  std::size_t min_length = 10;
  std::size_t max_length = 20;
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  Dataset train;
  Dataset test;
  std::vector<std::string> vocabulary;  // every token the generator may emit
  // signatures[r] holds the signature tokens of relation r (train first).
  std::vector<std::vector<std::string>> signatures;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec);

std::string token_name(std::size_t index);

// Random sentences with arbitrary labels: no feature separates the classes.
Dataset make_noise_dataset(std::size_t classes, std::size_t per_class, std::size_t vocabulary,
                           std::uint64_t seed, const std::string& label_prefix = "noise");

}  // namespace mick::testing
