#include "eadgen/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eadgen {

namespace {

double evaluate(const LossBuilder& f, ParamStore& store) {
  Tape tape(&store);
  const VarId loss = f(tape);
  return tape.scalar_value(loss);
}

}  // namespace

GradCheckReport compare_gradients(const std::vector<Tensor>& analytic,
                                  const LossBuilder& f, ParamStore& store,
                                  double h) {
  GradCheckReport report;
  report.loss = evaluate(f, store);
  for (std::size_t p = 0; p < store.count(); ++p) {
    Param& param = store.at(p);
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      const double saved = param.value.data[i];
      param.value.data[i] = saved + h;
      const double up = evaluate(f, store);
      param.value.data[i] = saved - h;
      const double down = evaluate(f, store);
      param.value.data[i] = saved;
      const double cd = (up - down) / (2.0 * h);
      const double a = analytic[p].data[i];
      const double rel =
          std::abs(a - cd) / std::max({std::abs(a), std::abs(cd), 1e-8});
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = param.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = cd;
      }
    }
  }
  return report;
}

GradCheckReport grad_check(const LossBuilder& f, ParamStore& store, double h) {
  const double first = evaluate(f, store);
  const double second = evaluate(f, store);
  if (first != second) {
    throw std::logic_error(
        "grad_check: loss is not deterministic (is dropout still enabled?)");
  }
  store.zero_grads();
  {
    Tape tape(&store);
    const VarId loss = f(tape);
    tape.backward(loss);
  }
  std::vector<Tensor> analytic;
  analytic.reserve(store.count());
  for (const Param& p : store.all()) analytic.push_back(p.grad);
  return compare_gradients(analytic, f, store, h);
}

}  // namespace eadgen
