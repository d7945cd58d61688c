#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "eadgen/rng.hpp"
#include "eadgen/tensor.hpp"

namespace eadgen {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value, accumulated across backward passes
};

// Named trainable tensors with paired gradient slots. Iteration order is
// creation order, which fixes both the RNG consumption during init and the
// checkpoint layout.
class ParamStore {
 public:
  std::uint64_t rng_seed = 0;

  // uniform(-range, range) initialization
  Tensor& create(const std::string& name, std::vector<std::size_t> shape,
                 Rng& rng, double range);
  Tensor& create_zeros(const std::string& name, std::vector<std::size_t> shape);

  bool has(const std::string& name) const { return by_name_.count(name) != 0; }
  int index_of(const std::string& name) const;
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  Param& at(std::size_t i) { return params_[i]; }
  const Param& at(std::size_t i) const { return params_[i]; }

  std::size_t count() const { return params_.size(); }
  std::size_t total_values() const;

  std::vector<Param>& all() { return params_; }
  const std::vector<Param>& all() const { return params_; }

  void zero_grads();
  double grad_norm() const;
  // scales all gradients by max_norm/||g|| when ||g|| exceeds max_norm
  void clip_gradients(double max_norm);
  void sgd_step(double lr);
  double squared_value_norm() const;

  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::vector<Param> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

}  // namespace eadgen
