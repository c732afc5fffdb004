#include "mick/support_classifier.hpp"

#include "mick/error.hpp"

namespace mick {

ClassifierParams ClassifierParams::zeros(std::size_t way, std::size_t hidden_dim) {
  if (way == 0 || hidden_dim == 0) throw ValidationError("classifier dimensions must be positive");
  return {{"classifier_weight", Tensor({way, hidden_dim})}, {"classifier_bias", Tensor({way})}};
}

ClassifierNodes ClassifierNodes::bind(Graph& graph, const ClassifierParams& params) {
  return {graph.leaf(params.weight.value), graph.leaf(params.bias.value), params.way()};
}

void ClassifierNodes::collect(const Gradients& grads, GradientMap& out,
                              const ClassifierParams& params) const {
  out.insert_or_assign(params.weight.name, grads.get(weight));
  out.insert_or_assign(params.bias.name, grads.get(bias));
}

NodeId classify_support(Graph& graph, const ClassifierNodes& clf, NodeId representation) {
  return graph.softmax(graph.add(graph.matmul(clf.weight, representation), clf.bias));
}

NodeId support_loss(Graph& graph, const ClassifierNodes& clf,
                    std::span<const std::vector<NodeId>> support) {
  if (support.size() != clf.way) {
    throw ValidationError("support classifier is " + std::to_string(clf.way) +
                          "-way but the episode has " + std::to_string(support.size()) +
                          " classes");
  }
  std::vector<NodeId> losses;
  for (std::size_t slot = 0; slot < support.size(); ++slot) {
    for (NodeId e : support[slot]) {
      losses.push_back(graph.cross_entropy(classify_support(graph, clf, e), slot));
    }
  }
  if (losses.empty()) throw ValidationError("support_loss: no support instances");
  return graph.scale(graph.sum(graph.concat_rows(losses)), 1.0 / static_cast<double>(losses.size()));
}

}  // namespace mick
