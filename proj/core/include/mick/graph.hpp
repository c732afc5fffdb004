#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mick/tensor.hpp"

namespace mick {

/// Handle of a value recorded in a Graph. Only meaningful for the graph
/// that issued it.
struct NodeId {
  std::uint32_t index = 0;
  friend auto operator<=>(NodeId, NodeId) = default;
};

enum class OpKind : std::uint8_t {
  kLeaf,
  kMatMul,
  kAdd,
  kScale,
  kNegate,
  kSum,
  kConcatRows,
  kConcatCols,
  kLookup,
  kConv1d,
  kMaxOverRows,
  kRelu,
  kSoftmax,
  kCrossEntropy,
  kSquaredDistance,
};

const char* to_string(OpKind kind) noexcept;

class Graph;

/// Gradients produced by Graph::backward, indexed by node.
class Gradients {
 public:
  // Gradient of `node`; an all-zero tensor of the node's shape when the node
  // is not reachable backward from the root.
  Tensor get(NodeId node) const;
  bool reached(NodeId node) const;

 private:
  friend class Graph;
  std::vector<Shape> shapes_;
  std::vector<std::optional<Tensor>> grads_;
};

/// Append-only tape of primitive applications. Node inputs always precede
/// the node, so reverse order is a valid topological order for backward.
///
/// Every primitive validates its inputs and throws ShapeError (naming the
/// offending shapes) or ValidationError before anything is recorded.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  NodeId leaf(Tensor value);

  const Tensor& value(NodeId node) const;
  OpKind kind(NodeId node) const;
  std::span<const NodeId> inputs(NodeId node) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  // [m x k] * [k x n] -> [m x n]; a rank-1 right operand [k] yields [m].
  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId negate(NodeId a);
  // Sum of all elements, as a scalar.
  NodeId sum(NodeId a);
  // Rank-1 inputs are concatenated; rank-2 inputs with equal column counts
  // are stacked.
  NodeId concat_rows(std::span<const NodeId> parts);
  // Rank-2 inputs with equal row counts, joined side by side.
  NodeId concat_cols(std::span<const NodeId> parts);
  // Gathers rows of `table` [V x D] -> [ids.size() x D].
  NodeId lookup(NodeId table, std::span<const std::uint32_t> ids);
  // Convolution over time. `input` is [T x D], `filters` is [H x (width*D)]
  // with window offsets laid out row-major, `bias` is [H]. Only the first
  // `length` input rows are read; the sentence is treated as zero-padded by
  // width/2 rows on each side. Output is [(length + 2*(width/2) - width + 1) x H].
  NodeId conv1d(NodeId input, NodeId filters, NodeId bias, std::size_t length,
                std::size_t width);
  // Column-wise maximum of a [P x H] matrix -> [H]. Ties resolve to the
  // lowest row.
  NodeId max_over_rows(NodeId a);
  NodeId relu(NodeId a);
  // Rank-1 softmax with max subtraction.
  NodeId softmax(NodeId a);
  // -log(max(dist[target], 1e-12)) for a probability vector.
  NodeId cross_entropy(NodeId dist, std::size_t target);
  // Sum of squared elementwise differences, as a scalar.
  NodeId squared_distance(NodeId a, NodeId b);

  // Reverse-mode sweep from a scalar root. The root's gradient is 1.
  Gradients backward(NodeId root) const;

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::vector<NodeId> inputs;
    Tensor value;
    // Primitive-specific extras: lookup ids, argmax rows, target index,
    // conv geometry, scale factor.
    std::vector<std::uint32_t> indices;
    std::size_t length = 0;
    std::size_t width = 0;
    double factor = 0.0;
  };

  const Node& node(NodeId id) const;
  NodeId push(Node node);
  void propagate(const Node& node, const Tensor& grad, std::vector<std::optional<Tensor>>& grads) const;

  std::vector<Node> nodes_;
};

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace mick
