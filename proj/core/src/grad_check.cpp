#include "mick/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "mick/error.hpp"

namespace mick {

namespace {

double evaluate(const ScalarFunction& f, std::span<const Tensor> params) {
  Graph graph;
  std::vector<NodeId> leaves;
  leaves.reserve(params.size());
  for (const Tensor& p : params) leaves.push_back(graph.leaf(p));
  return graph.value(f(graph, leaves)).item();
}

}  // namespace

GradCheckReport grad_check(const ScalarFunction& f, std::span<Tensor> params, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) {
    throw ValidationError("grad_check: eps must lie in [1e-7, 1e-3]");
  }

  Graph graph;
  std::vector<NodeId> leaves;
  leaves.reserve(params.size());
  for (const Tensor& p : params) leaves.push_back(graph.leaf(p));
  const NodeId root = f(graph, leaves);
  const double base = graph.value(root).item();
  const Gradients grads = graph.backward(root);

  const double again = evaluate(f, params);
  if (std::memcmp(&base, &again, sizeof(double)) != 0) {
    throw ValidationError("grad_check: computation is not deterministic");
  }

  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor analytic = grads.get(leaves[k]);
    Tensor& p = params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double plus = evaluate(f, params);
      p[i] = saved - eps;
      const double minus = evaluate(f, params);
      p[i] = saved;

      const double numeric = (plus - minus) / (2.0 * eps);
      const double diff = std::abs(analytic[i] - numeric);
      const double denom = std::max(std::abs(analytic[i]), std::abs(numeric));
      const double err = denom < 1e-8 ? diff : diff / denom;
      report.max_relative_error = std::max(report.max_relative_error, err);
      ++report.elements_checked;
    }
  }
  return report;
}

}  // namespace mick
