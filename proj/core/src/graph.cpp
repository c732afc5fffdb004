#include "mick/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mick/error.hpp"

namespace mick {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

Tensor& slot(std::vector<std::optional<Tensor>>& grads, NodeId id, const Shape& shape) {
  auto& g = grads[id.index];
  if (!g) g.emplace(shape);
  return *g;
}

}  // namespace

const char* to_string(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kScale: return "scale";
    case OpKind::kNegate: return "negate";
    case OpKind::kSum: return "sum";
    case OpKind::kConcatRows: return "concat_rows";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kLookup: return "lookup";
    case OpKind::kConv1d: return "conv1d";
    case OpKind::kMaxOverRows: return "max_over_rows";
    case OpKind::kRelu: return "relu";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kCrossEntropy: return "cross_entropy";
    case OpKind::kSquaredDistance: return "squared_distance";
  }
  return "unknown";
}

Tensor Gradients::get(NodeId node) const {
  if (node.index >= grads_.size()) throw ValidationError("gradient requested for unknown node");
  if (grads_[node.index]) return *grads_[node.index];
  return Tensor(shapes_[node.index]);
}

bool Gradients::reached(NodeId node) const {
  return node.index < grads_.size() && grads_[node.index].has_value();
}

const Graph::Node& Graph::node(NodeId id) const {
  if (id.index >= nodes_.size()) throw ValidationError("node id does not belong to this graph");
  return nodes_[id.index];
}

NodeId Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

NodeId Graph::leaf(Tensor value) {
  if (value.empty()) throw ShapeError("leaf: empty tensor");
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

const Tensor& Graph::value(NodeId id) const { return node(id).value; }
OpKind Graph::kind(NodeId id) const { return node(id).kind; }
std::span<const NodeId> Graph::inputs(NodeId id) const { return node(id).inputs; }

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require_rank(x, 2, "matmul");
  if (y.rank() != 1 && y.rank() != 2) {
    throw ShapeError("matmul: right operand must be rank 1 or 2, got " + to_string(y.shape()));
  }
  const std::size_t m = x.shape()[0], k = x.shape()[1];
  const std::size_t n = y.rank() == 2 ? y.shape()[1] : 1;
  if (y.shape()[0] != k) {
    throw ShapeError("matmul: inner dimensions differ, " + to_string(x.shape()) + " x " +
                     to_string(y.shape()));
  }
  Tensor out(y.rank() == 2 ? Shape{m, n} : Shape{m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x[i * k + p];
      if (xv == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * y[p * n + j];
    }
  }
  Node r;
  r.kind = OpKind::kMatMul;
  r.inputs = {a, b};
  r.value = std::move(out);
  return push(std::move(r));
}

NodeId Graph::add(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "add");
  Tensor out = value(a);
  out.add_scaled(value(b));
  Node r;
  r.kind = OpKind::kAdd;
  r.inputs = {a, b};
  r.value = std::move(out);
  return push(std::move(r));
}

NodeId Graph::scale(NodeId a, double factor) {
  if (!std::isfinite(factor)) throw ValidationError("scale: non-finite factor");
  Tensor out = value(a);
  for (double& v : out.values()) v *= factor;
  Node r;
  r.kind = OpKind::kScale;
  r.inputs = {a};
  r.value = std::move(out);
  r.factor = factor;
  return push(std::move(r));
}

NodeId Graph::negate(NodeId a) {
  Tensor out = value(a);
  for (double& v : out.values()) v = -v;
  Node r;
  r.kind = OpKind::kNegate;
  r.inputs = {a};
  r.value = std::move(out);
  return push(std::move(r));
}

NodeId Graph::sum(NodeId a) {
  double total = 0.0;
  for (double v : value(a).values()) total += v;
  Node r;
  r.kind = OpKind::kSum;
  r.inputs = {a};
  r.value = Tensor::scalar(total);
  return push(std::move(r));
}

NodeId Graph::concat_rows(std::span<const NodeId> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const Tensor& first = value(parts.front());
  if (first.rank() != 1 && first.rank() != 2) {
    throw ShapeError("concat_rows: inputs must be rank 1 or 2, got " + to_string(first.shape()));
  }
  std::size_t total_rows = 0;
  for (NodeId p : parts) {
    const Tensor& t = value(p);
    if (t.rank() != first.rank() || (t.rank() == 2 && t.shape()[1] != first.shape()[1])) {
      throw ShapeError("concat_rows: incompatible shapes " + to_string(first.shape()) + " and " +
                       to_string(t.shape()));
    }
    total_rows += t.shape()[0];
  }
  Shape shape = first.rank() == 1 ? Shape{total_rows} : Shape{total_rows, first.shape()[1]};
  std::vector<double> data;
  data.reserve(total_rows * (first.rank() == 2 ? first.shape()[1] : 1));
  for (NodeId p : parts) {
    const auto v = value(p).values();
    data.insert(data.end(), v.begin(), v.end());
  }
  Node r;
  r.kind = OpKind::kConcatRows;
  r.inputs.assign(parts.begin(), parts.end());
  r.value = Tensor(std::move(shape), std::move(data));
  return push(std::move(r));
}

NodeId Graph::concat_cols(std::span<const NodeId> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Tensor& first = value(parts.front());
  require_rank(first, 2, "concat_cols");
  const std::size_t rows = first.shape()[0];
  std::size_t total_cols = 0;
  for (NodeId p : parts) {
    const Tensor& t = value(p);
    if (t.rank() != 2 || t.shape()[0] != rows) {
      throw ShapeError("concat_cols: incompatible shapes " + to_string(first.shape()) + " and " +
                       to_string(t.shape()));
    }
    total_cols += t.shape()[1];
  }
  Tensor out({rows, total_cols});
  std::size_t offset = 0;
  for (NodeId p : parts) {
    const Tensor& t = value(p);
    const std::size_t c = t.shape()[1];
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy_n(t.values().begin() + static_cast<std::ptrdiff_t>(i * c), c,
                  out.values().begin() + static_cast<std::ptrdiff_t>(i * total_cols + offset));
    }
    offset += c;
  }
  Node r;
  r.kind = OpKind::kConcatCols;
  r.inputs.assign(parts.begin(), parts.end());
  r.value = std::move(out);
  return push(std::move(r));
}

NodeId Graph::lookup(NodeId table, std::span<const std::uint32_t> ids) {
  const Tensor& t = value(table);
  require_rank(t, 2, "lookup");
  if (ids.empty()) throw ShapeError("lookup: empty id list");
  const std::size_t rows = t.shape()[0], dim = t.shape()[1];
  Tensor out({ids.size(), dim});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= rows) {
      throw ValidationError("lookup: id " + std::to_string(ids[i]) + " out of bounds for table " +
                            to_string(t.shape()));
    }
    const auto src = t.row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  Node r;
  r.kind = OpKind::kLookup;
  r.inputs = {table};
  r.value = std::move(out);
  r.indices.assign(ids.begin(), ids.end());
  return push(std::move(r));
}

NodeId Graph::conv1d(NodeId input, NodeId filters, NodeId bias, std::size_t length,
                     std::size_t width) {
  const Tensor& x = value(input);
  const Tensor& f = value(filters);
  const Tensor& b = value(bias);
  require_rank(x, 2, "conv1d input");
  require_rank(f, 2, "conv1d filters");
  require_rank(b, 1, "conv1d bias");
  if (width == 0) throw ValidationError("conv1d: width must be positive");
  if (length == 0 || length > x.shape()[0]) {
    throw ValidationError("conv1d: length " + std::to_string(length) + " outside input " +
                          to_string(x.shape()));
  }
  const std::size_t depth = x.shape()[1];
  const std::size_t hidden = f.shape()[0];
  if (f.shape()[1] != width * depth || b.shape()[0] != hidden) {
    throw ShapeError("conv1d: filters " + to_string(f.shape()) + " / bias " +
                     to_string(b.shape()) + " incompatible with input " + to_string(x.shape()) +
                     " and width " + std::to_string(width));
  }
  const std::size_t pad = width / 2;
  if (length + 2 * pad < width) throw ValidationError("conv1d: sentence shorter than window");
  const std::size_t positions = length + 2 * pad - width + 1;
  const std::size_t span = width * depth;

  Tensor out({positions, hidden});
  std::vector<double> window(span);
  for (std::size_t p = 0; p < positions; ++p) {
    std::fill(window.begin(), window.end(), 0.0);
    for (std::size_t o = 0; o < width; ++o) {
      const auto row = static_cast<std::ptrdiff_t>(p + o) - static_cast<std::ptrdiff_t>(pad);
      if (row < 0 || row >= static_cast<std::ptrdiff_t>(length)) continue;
      const auto src = x.row(static_cast<std::size_t>(row));
      std::copy(src.begin(), src.end(), window.begin() + static_cast<std::ptrdiff_t>(o * depth));
    }
    for (std::size_t h = 0; h < hidden; ++h) {
      const auto w = f.row(h);
      double acc = b[h];
      for (std::size_t i = 0; i < span; ++i) acc += w[i] * window[i];
      out.at(p, h) = acc;
    }
  }
  Node r;
  r.kind = OpKind::kConv1d;
  r.inputs = {input, filters, bias};
  r.value = std::move(out);
  r.length = length;
  r.width = width;
  return push(std::move(r));
}

NodeId Graph::max_over_rows(NodeId a) {
  const Tensor& x = value(a);
  require_rank(x, 2, "max_over_rows");
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  Tensor out({cols});
  std::vector<std::uint32_t> argmax(cols, 0);
  for (std::size_t c = 0; c < cols; ++c) {
    double best = x.at(0, c);
    for (std::size_t r = 1; r < rows; ++r) {
      if (x.at(r, c) > best) {
        best = x.at(r, c);
        argmax[c] = static_cast<std::uint32_t>(r);
      }
    }
    out[c] = best;
  }
  Node r;
  r.kind = OpKind::kMaxOverRows;
  r.inputs = {a};
  r.value = std::move(out);
  r.indices = std::move(argmax);
  return push(std::move(r));
}

NodeId Graph::relu(NodeId a) {
  Tensor out = value(a);
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  Node r;
  r.kind = OpKind::kRelu;
  r.inputs = {a};
  r.value = std::move(out);
  return push(std::move(r));
}

NodeId Graph::softmax(NodeId a) {
  const Tensor& x = value(a);
  require_rank(x, 1, "softmax");
  const double peak = *std::max_element(x.values().begin(), x.values().end());
  Tensor out(x.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - peak);
    total += out[i];
  }
  for (double& v : out.values()) v /= total;
  Node r;
  r.kind = OpKind::kSoftmax;
  r.inputs = {a};
  r.value = std::move(out);
  return push(std::move(r));
}

NodeId Graph::cross_entropy(NodeId dist, std::size_t target) {
  const Tensor& p = value(dist);
  require_rank(p, 1, "cross_entropy");
  if (target >= p.size()) {
    throw ValidationError("cross_entropy: target " + std::to_string(target) +
                          " out of range for " + std::to_string(p.size()) + " classes");
  }
  double total = 0.0;
  for (double v : p.values()) total += v;
  if (std::abs(total - 1.0) > 1e-9) {
    throw ValidationError("cross_entropy: distribution sums to " + std::to_string(total));
  }
  Node r;
  r.kind = OpKind::kCrossEntropy;
  r.inputs = {dist};
  r.value = Tensor::scalar(-std::log(std::max(p[target], kProbabilityFloor)));
  r.indices = {static_cast<std::uint32_t>(target)};
  return push(std::move(r));
}

NodeId Graph::squared_distance(NodeId a, NodeId b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require_same_shape(x, y, "squared_distance");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    total += d * d;
  }
  Node r;
  r.kind = OpKind::kSquaredDistance;
  r.inputs = {a, b};
  r.value = Tensor::scalar(total);
  return push(std::move(r));
}

Gradients Graph::backward(NodeId root) const {
  const Tensor& root_value = value(root);
  if (!root_value.is_scalar()) {
    throw ShapeError("backward: root must be scalar, got " + to_string(root_value.shape()));
  }
  Gradients result;
  result.shapes_.reserve(nodes_.size());
  for (const Node& n : nodes_) result.shapes_.push_back(n.value.shape());
  result.grads_.resize(nodes_.size());
  result.grads_[root.index].emplace(root_value.shape(), 1.0);

  for (std::size_t i = root.index + 1; i-- > 0;) {
    if (!result.grads_[i]) continue;
    const Node& n = nodes_[i];
    if (n.kind == OpKind::kLeaf) continue;
    // grads_ was sized up front, so this reference survives the slot() calls.
    propagate(n, *result.grads_[i], result.grads_);
  }
  return result;
}

void Graph::propagate(const Node& n, const Tensor& g,
                      std::vector<std::optional<Tensor>>& grads) const {
  switch (n.kind) {
    case OpKind::kLeaf:
      return;

    case OpKind::kMatMul: {
      const Tensor& x = value(n.inputs[0]);
      const Tensor& y = value(n.inputs[1]);
      const std::size_t m = x.shape()[0], k = x.shape()[1];
      const std::size_t cols = y.rank() == 2 ? y.shape()[1] : 1;
      Tensor& gx = slot(grads, n.inputs[0], x.shape());
      Tensor& gy = slot(grads, n.inputs[1], y.shape());
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          const double xv = x[i * k + p];
          for (std::size_t j = 0; j < cols; ++j) {
            const double gv = g[i * cols + j];
            acc += gv * y[p * cols + j];
            gy[p * cols + j] += xv * gv;
          }
          gx[i * k + p] += acc;
        }
      }
      return;
    }

    case OpKind::kAdd:
      slot(grads, n.inputs[0], g.shape()).add_scaled(g);
      slot(grads, n.inputs[1], g.shape()).add_scaled(g);
      return;

    case OpKind::kScale:
      slot(grads, n.inputs[0], g.shape()).add_scaled(g, n.factor);
      return;

    case OpKind::kNegate:
      slot(grads, n.inputs[0], g.shape()).add_scaled(g, -1.0);
      return;

    case OpKind::kSum: {
      const double gv = g[0];
      Tensor& gx = slot(grads, n.inputs[0], value(n.inputs[0]).shape());
      for (double& v : gx.values()) v += gv;
      return;
    }

    case OpKind::kConcatRows: {
      std::size_t offset = 0;
      for (NodeId in : n.inputs) {
        const Tensor& part = value(in);
        Tensor& gp = slot(grads, in, part.shape());
        for (std::size_t i = 0; i < part.size(); ++i) gp[i] += g[offset + i];
        offset += part.size();
      }
      return;
    }

    case OpKind::kConcatCols: {
      const std::size_t rows = n.value.shape()[0], total = n.value.shape()[1];
      std::size_t offset = 0;
      for (NodeId in : n.inputs) {
        const Tensor& part = value(in);
        const std::size_t c = part.shape()[1];
        Tensor& gp = slot(grads, in, part.shape());
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < c; ++j) gp[r * c + j] += g[r * total + offset + j];
        }
        offset += c;
      }
      return;
    }

    case OpKind::kLookup: {
      const Tensor& table = value(n.inputs[0]);
      const std::size_t dim = table.shape()[1];
      Tensor& gt = slot(grads, n.inputs[0], table.shape());
      for (std::size_t i = 0; i < n.indices.size(); ++i) {
        auto dst = gt.row(n.indices[i]);
        for (std::size_t j = 0; j < dim; ++j) dst[j] += g[i * dim + j];
      }
      return;
    }

    case OpKind::kConv1d: {
      const Tensor& x = value(n.inputs[0]);
      const Tensor& f = value(n.inputs[1]);
      const std::size_t depth = x.shape()[1];
      const std::size_t hidden = f.shape()[0];
      const std::size_t width = n.width, length = n.length, pad = width / 2;
      const std::size_t positions = n.value.shape()[0];
      const std::size_t span = width * depth;
      Tensor& gx = slot(grads, n.inputs[0], x.shape());
      Tensor& gf = slot(grads, n.inputs[1], f.shape());
      Tensor& gb = slot(grads, n.inputs[2], Shape{hidden});
      std::vector<double> window(span), gwindow(span);
      for (std::size_t p = 0; p < positions; ++p) {
        std::fill(window.begin(), window.end(), 0.0);
        std::fill(gwindow.begin(), gwindow.end(), 0.0);
        for (std::size_t o = 0; o < width; ++o) {
          const auto row = static_cast<std::ptrdiff_t>(p + o) - static_cast<std::ptrdiff_t>(pad);
          if (row < 0 || row >= static_cast<std::ptrdiff_t>(length)) continue;
          const auto src = x.row(static_cast<std::size_t>(row));
          std::copy(src.begin(), src.end(), window.begin() + static_cast<std::ptrdiff_t>(o * depth));
        }
        for (std::size_t h = 0; h < hidden; ++h) {
          const double gv = g.at(p, h);
          if (gv == 0.0) continue;
          gb[h] += gv;
          const auto w = f.row(h);
          auto dw = gf.row(h);
          for (std::size_t i = 0; i < span; ++i) {
            dw[i] += gv * window[i];
            gwindow[i] += gv * w[i];
          }
        }
        for (std::size_t o = 0; o < width; ++o) {
          const auto row = static_cast<std::ptrdiff_t>(p + o) - static_cast<std::ptrdiff_t>(pad);
          if (row < 0 || row >= static_cast<std::ptrdiff_t>(length)) continue;
          auto dst = gx.row(static_cast<std::size_t>(row));
          for (std::size_t d = 0; d < depth; ++d) dst[d] += gwindow[o * depth + d];
        }
      }
      return;
    }

    case OpKind::kMaxOverRows: {
      const Tensor& x = value(n.inputs[0]);
      Tensor& gx = slot(grads, n.inputs[0], x.shape());
      for (std::size_t c = 0; c < n.indices.size(); ++c) gx.at(n.indices[c], c) += g[c];
      return;
    }

    case OpKind::kRelu: {
      const Tensor& x = value(n.inputs[0]);
      Tensor& gx = slot(grads, n.inputs[0], x.shape());
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > 0.0) gx[i] += g[i];
      }
      return;
    }

    case OpKind::kSoftmax: {
      const Tensor& y = n.value;
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
      Tensor& gx = slot(grads, n.inputs[0], y.shape());
      for (std::size_t i = 0; i < y.size(); ++i) gx[i] += y[i] * (g[i] - dot);
      return;
    }

    case OpKind::kCrossEntropy: {
      const Tensor& p = value(n.inputs[0]);
      const std::size_t t = n.indices[0];
      Tensor& gp = slot(grads, n.inputs[0], p.shape());
      // Below the floor the clamped value is constant in p.
      if (p[t] > kProbabilityFloor) gp[t] += -g[0] / p[t];
      return;
    }

    case OpKind::kSquaredDistance: {
      const Tensor& x = value(n.inputs[0]);
      const Tensor& y = value(n.inputs[1]);
      const double gv = g[0];
      Tensor& gx = slot(grads, n.inputs[0], x.shape());
      Tensor& gy = slot(grads, n.inputs[1], y.shape());
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = 2.0 * gv * (x[i] - y[i]);
        gx[i] += d;
        gy[i] -= d;
      }
      return;
    }
  }
}

}  // namespace mick
