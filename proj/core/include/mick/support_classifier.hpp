#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mick/graph.hpp"
#include "mick/optim.hpp"

namespace mick {

/// Linear N-way head over support representations: the fast-learner
/// parameters. Rows are tied to episode class slots, not to relation labels.
struct ClassifierParams {
  Parameter weight;  // N x d_h
  Parameter bias;    // N

  // Both zero, so the first prediction is exactly uniform.
  static ClassifierParams zeros(std::size_t way, std::size_t hidden_dim);

  std::size_t way() const noexcept { return bias.value.size(); }
  std::array<Parameter*, 2> parameters() noexcept { return {&weight, &bias}; }
  std::array<const Parameter*, 2> parameters() const noexcept { return {&weight, &bias}; }
};

struct ClassifierNodes {
  NodeId weight;
  NodeId bias;
  std::size_t way = 0;

  static ClassifierNodes bind(Graph& graph, const ClassifierParams& params);
  void collect(const Gradients& grads, GradientMap& out, const ClassifierParams& params) const;
};

/// O = softmax(W E + b).
NodeId classify_support(Graph& graph, const ClassifierNodes& clf, NodeId representation);

/// Mean cross-entropy of classify_support over every support vector;
/// `support[i]` holds the vectors of slot i. The classifier's way count must
/// equal the number of slots.
NodeId support_loss(Graph& graph, const ClassifierNodes& clf,
                    std::span<const std::vector<NodeId>> support);

}  // namespace mick
