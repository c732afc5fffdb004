#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mick/graph.hpp"

namespace mick {

/// One prototype per class slot, recorded in the graph so gradients reach
/// the encoder through them.
struct PrototypeSet {
  std::vector<NodeId> vectors;
  std::vector<std::string> class_labels;

  std::size_t way() const noexcept { return vectors.size(); }
};

/// Prototype i is the mean of the support vectors of slot i.
/// `support[i]` holds the K vectors of slot i.
PrototypeSet compute_prototypes(Graph& graph, std::span<const std::vector<NodeId>> support,
                                std::vector<std::string> labels = {});

struct MatchResult {
  NodeId scores;  // [N], scores[i] = -||q - prototype_i||^2
  std::size_t predicted = 0;
};

// Ties in the argmax go to the lowest slot.
std::size_t argmax(std::span<const double> values);

MatchResult match_query(Graph& graph, NodeId query, const PrototypeSet& protos);

/// Mean over all queries of cross-entropy(softmax(scores), true slot).
/// `queries[i]` holds the vectors whose true slot is i.
NodeId match_loss(Graph& graph, std::span<const std::vector<NodeId>> queries,
                  const PrototypeSet& protos);

}  // namespace mick
