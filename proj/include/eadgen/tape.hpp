#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eadgen/params.hpp"
#include "eadgen/tensor.hpp"

namespace eadgen {

using VarId = int;
constexpr VarId kNoVar = -1;

// Reverse-mode gradient engine over a dynamically recorded computation
// graph. Operations append nodes in execution order; backward() replays
// them in reverse, accumulates parameter gradients into the bound
// ParamStore, and clears the recording.
//
// A tape bound to a const store can run forward passes only (generation);
// backward() requires mutable binding. One tape is confined to a single
// thread.
class Tape {
 public:
  Tape() : store_(nullptr), store_ro_(nullptr) {}
  explicit Tape(ParamStore* store) : store_(store), store_ro_(store) {}
  explicit Tape(const ParamStore* store) : store_(nullptr), store_ro_(store) {}

  // ---- leaves ----
  VarId constant(Tensor v);
  VarId param(const std::string& name);
  VarId param_row(const std::string& name, std::size_t row);

  // ---- recorded operations ----
  VarId matvec(VarId w, VarId x);
  VarId add(VarId a, VarId b);
  VarId hadamard(VarId a, VarId b);
  // scalar * vector
  VarId scale(VarId s, VarId v);
  VarId sigmoid(VarId a);
  VarId tanh(VarId a);
  VarId concat(VarId a, VarId b);
  VarId dot(VarId a, VarId b);
  // gathers scalar nodes into one vector
  VarId pack(const std::vector<VarId>& scalars);
  // sum_i weights[i] * vs[i]
  VarId weighted_sum(VarId weights, const std::vector<VarId>& vs);
  VarId softmax(VarId v);
  VarId log_softmax(VarId v);
  VarId pick(VarId v, std::size_t index);
  VarId neg(VarId a);
  VarId sum(const std::vector<VarId>& scalars);
  // u*h_prev + (1-u)*h_cand
  VarId gru_blend(VarId u, VarId h_prev, VarId h_cand);
  // coeff * sum of squares over every parameter of the bound store
  VarId l2_penalty(double coeff);

  const Tensor& value(VarId id) const;
  double scalar_value(VarId id) const;

  // Accumulates d(loss)/d(param) into the store for every parameter leaf
  // recorded on this tape, then clears the tape. `loss` must be a scalar.
  void backward(VarId loss);

  std::size_t node_count() const { return nodes_.size(); }
  void clear();

 private:
  enum class Op {
    Constant,
    ParamRef,
    ParamRowRef,
    MatVec,
    Add,
    Hadamard,
    Scale,
    Sigmoid,
    Tanh,
    Concat,
    Dot,
    Pack,
    WeightedSum,
    Softmax,
    LogSoftmax,
    Pick,
    Neg,
    Sum,
    GruBlend,
    L2Penalty,
  };

  struct Node {
    Op op;
    Tensor value;        // unused for ParamRef (value lives in the store)
    Tensor grad;
    std::vector<VarId> inputs;
    int param_index = -1;  // ParamRef / ParamRowRef
    std::size_t aux = 0;   // row for ParamRowRef, index for Pick
    double coeff = 0.0;    // L2Penalty
  };

  VarId push(Node n);
  const Tensor& val(VarId id) const;
  Node& node(VarId id) { return nodes_[static_cast<std::size_t>(id)]; }
  void check(VarId id) const;
  void backprop_node(std::size_t i);

  std::vector<Node> nodes_;
  ParamStore* store_;
  const ParamStore* store_ro_;
  std::map<std::pair<int, std::size_t>, VarId> param_nodes_;
};

}  // namespace eadgen
