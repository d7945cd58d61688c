#include "eadgen/params.hpp"

#include <cmath>
#include <stdexcept>

namespace eadgen {

Tensor& ParamStore::create(const std::string& name,
                           std::vector<std::size_t> shape, Rng& rng,
                           double range) {
  Tensor& t = create_zeros(name, std::move(shape));
  for (double& v : t.data) v = rng.uniform(-range, range);
  return t;
}

Tensor& ParamStore::create_zeros(const std::string& name,
                                 std::vector<std::size_t> shape) {
  if (by_name_.count(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  Param p;
  p.name = name;
  p.value = Tensor::zeros(shape);
  p.grad = Tensor::zeros(std::move(shape));
  by_name_[name] = params_.size();
  params_.push_back(std::move(p));
  return params_.back().value;
}

int ParamStore::index_of(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : static_cast<int>(it->second);
}

Param& ParamStore::at(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) {
    throw std::invalid_argument("unknown parameter: " + name);
  }
  return params_[it->second];
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) {
    throw std::invalid_argument("unknown parameter: " + name);
  }
  return params_[it->second];
}

std::size_t ParamStore::total_values() const {
  std::size_t n = 0;
  for (const Param& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grads() {
  for (Param& p : params_) p.grad.fill(0.0);
}

double ParamStore::grad_norm() const {
  double acc = 0.0;
  for (const Param& p : params_) {
    for (double g : p.grad.data) acc += g * g;
  }
  return std::sqrt(acc);
}

void ParamStore::clip_gradients(double max_norm) {
  const double norm = grad_norm();
  if (norm <= max_norm || norm == 0.0) return;
  const double scale = max_norm / norm;
  for (Param& p : params_) {
    for (double& g : p.grad.data) g *= scale;
  }
}

void ParamStore::sgd_step(double lr) {
  for (Param& p : params_) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      p.value.data[i] -= lr * p.grad.data[i];
    }
  }
}

double ParamStore::squared_value_norm() const {
  double acc = 0.0;
  for (const Param& p : params_) {
    for (double v : p.value.data) acc += v * v;
  }
  return acc;
}

std::vector<Tensor> ParamStore::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const Param& p : params_) out.push_back(p.value);
  return out;
}

void ParamStore::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) {
    throw std::invalid_argument("snapshot size mismatch");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    params_[i].value = values[i];
  }
}

}  // namespace eadgen
