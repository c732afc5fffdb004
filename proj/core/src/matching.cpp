#include "mick/matching.hpp"

#include "mick/error.hpp"

namespace mick {

PrototypeSet compute_prototypes(Graph& graph, std::span<const std::vector<NodeId>> support,
                                std::vector<std::string> labels) {
  if (support.empty()) throw ValidationError("compute_prototypes: no classes");
  if (!labels.empty() && labels.size() != support.size()) {
    throw ValidationError("compute_prototypes: label count differs from class count");
  }
  PrototypeSet protos;
  protos.class_labels = std::move(labels);
  for (std::size_t slot = 0; slot < support.size(); ++slot) {
    const auto& row = support[slot];
    if (row.empty()) {
      throw ValidationError("compute_prototypes: class slot " + std::to_string(slot) +
                            " has no support vectors");
    }
    NodeId total = row.front();
    for (std::size_t k = 1; k < row.size(); ++k) total = graph.add(total, row[k]);
    protos.vectors.push_back(
        row.size() == 1 ? total : graph.scale(total, 1.0 / static_cast<double>(row.size())));
  }
  return protos;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

MatchResult match_query(Graph& graph, NodeId query, const PrototypeSet& protos) {
  if (protos.vectors.empty()) throw ValidationError("match_query: empty prototype set");
  std::vector<NodeId> distances;
  distances.reserve(protos.way());
  for (NodeId proto : protos.vectors) distances.push_back(graph.squared_distance(query, proto));
  MatchResult result;
  result.scores = graph.negate(graph.concat_rows(distances));
  result.predicted = argmax(graph.value(result.scores).values());
  return result;
}

NodeId match_loss(Graph& graph, std::span<const std::vector<NodeId>> queries,
                  const PrototypeSet& protos) {
  if (queries.size() != protos.way()) {
    throw ValidationError("match_loss: query grid has " + std::to_string(queries.size()) +
                          " rows for " + std::to_string(protos.way()) + " prototypes");
  }
  std::vector<NodeId> losses;
  for (std::size_t slot = 0; slot < queries.size(); ++slot) {
    for (NodeId q : queries[slot]) {
      const MatchResult m = match_query(graph, q, protos);
      losses.push_back(graph.cross_entropy(graph.softmax(m.scores), slot));
    }
  }
  if (losses.empty()) throw ValidationError("match_loss: no queries");
  return graph.scale(graph.sum(graph.concat_rows(losses)), 1.0 / static_cast<double>(losses.size()));
}

}  // namespace mick
