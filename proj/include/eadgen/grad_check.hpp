#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eadgen/params.hpp"
#include "eadgen/tape.hpp"

namespace eadgen {

// Builds a scalar loss on the given tape. The builder must be
// deterministic given the store contents (dropout disabled).
using LossBuilder = std::function<VarId(Tape&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  double loss = 0.0;
};

// Per-element relative error between `analytic` (one tensor per store
// parameter, in store order) and central finite differences of f:
//   |analytic - cd| / max(|analytic|, |cd|, 1e-8)
GradCheckReport compare_gradients(const std::vector<Tensor>& analytic,
                                  const LossBuilder& f, ParamStore& store,
                                  double h);

// Runs one backward pass for the analytic gradients, then compares against
// central differences. Throws std::logic_error when two evaluations of f at
// the same parameters disagree (non-deterministic f).
GradCheckReport grad_check(const LossBuilder& f, ParamStore& store, double h);

}  // namespace eadgen
