#include "mick/optim.hpp"

#include <cmath>

#include "mick/error.hpp"

namespace mick {

void sgd_update(std::span<Parameter* const> params, const GradientMap& grads, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw ValidationError("sgd_update: learning rate must be a finite non-negative number");
  }
  for (const Parameter* p : params) {
    auto it = grads.find(p->name);
    if (it == grads.end()) throw ValidationError("sgd_update: no gradient for '" + p->name + "'");
    if (it->second.shape() != p->value.shape()) {
      throw ShapeError("sgd_update: gradient for '" + p->name + "' has shape " +
                       to_string(it->second.shape()) + ", parameter has " +
                       to_string(p->value.shape()));
    }
    if (!it->second.all_finite()) {
      throw ValidationError("sgd_update: non-finite gradient for '" + p->name + "'");
    }
  }
  if (lr == 0.0) return;
  for (Parameter* p : params) p->value.add_scaled(grads.at(p->name), -lr);
}

}  // namespace mick
