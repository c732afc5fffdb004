#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mick/graph.hpp"
#include "mick/tensor.hpp"

namespace mick {

/// Records a scalar computation into `graph` given one leaf per parameter
/// (same order as the tensors handed to grad_check) and returns its root.
using ScalarFunction = std::function<NodeId(Graph& graph, std::span<const NodeId> params)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t elements_checked = 0;
};

/// Compares reverse-mode gradients of `f` against central differences
/// (f(x+eps) - f(x-eps)) / (2 eps) for every element of every parameter.
///
/// The error for one element is |analytic - numeric| / max(|analytic|, |numeric|),
/// falling back to the absolute difference when that denominator is below
/// 1e-8. Returns the worst element. `params` are restored before returning.
///
/// Throws ValidationError when eps lies outside [1e-7, 1e-3] or when two
/// forward passes at the same point disagree.
GradCheckReport grad_check(const ScalarFunction& f, std::span<Tensor> params, double eps = 1e-5);

}  // namespace mick
