#pragma once

#include <map>
#include <span>
#include <string>

#include "mick/tensor.hpp"

namespace mick {

struct Parameter {
  std::string name;
  Tensor value;
};

using GradientMap = std::map<std::string, Tensor>;

/// Plain gradient step p <- p - lr * g for every parameter. No momentum, no
/// decay. Every parameter needs an entry in `grads` (zeros allowed). A zero
/// learning rate leaves the parameters bitwise untouched.
///
/// Validation happens before any parameter is written, so a failed call
/// leaves everything as it was.
void sgd_update(std::span<Parameter* const> params, const GradientMap& grads, double lr);

}  // namespace mick
