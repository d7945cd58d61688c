#include "eadgen/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace eadgen {

VarId Tape::push(Node n) {
  // Gradient buffers only matter on a tape that can run backward();
  // read-only (generation) tapes skip them to halve their footprint.
  if (store_ && n.op != Op::ParamRef) {
    n.grad = Tensor::zeros(n.value.shape);
  }
  nodes_.push_back(std::move(n));
  return static_cast<VarId>(nodes_.size() - 1);
}

void Tape::check(VarId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw std::invalid_argument("tape: bad node id");
  }
}

const Tensor& Tape::val(VarId id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.op == Op::ParamRef) {
    return store_ro_->at(static_cast<std::size_t>(n.param_index)).value;
  }
  return n.value;
}

const Tensor& Tape::value(VarId id) const {
  check(id);
  return val(id);
}

double Tape::scalar_value(VarId id) const {
  const Tensor& t = value(id);
  if (!t.is_scalar()) throw std::invalid_argument("tape: not a scalar node");
  return t.data[0];
}

VarId Tape::constant(Tensor v) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(v);
  return push(std::move(n));
}

VarId Tape::param(const std::string& name) {
  if (!store_ro_) throw std::logic_error("tape: no parameter store bound");
  const int idx = store_ro_->index_of(name);
  if (idx < 0) throw std::invalid_argument("unknown parameter: " + name);
  auto key = std::make_pair(idx, static_cast<std::size_t>(-1));
  auto it = param_nodes_.find(key);
  if (it != param_nodes_.end()) return it->second;
  Node n;
  n.op = Op::ParamRef;
  n.param_index = idx;
  if (store_) {
    n.grad = Tensor::zeros(store_ro_->at(static_cast<std::size_t>(idx)).value.shape);
  }
  VarId id = push(std::move(n));
  param_nodes_[key] = id;
  return id;
}

VarId Tape::param_row(const std::string& name, std::size_t row) {
  if (!store_ro_) throw std::logic_error("tape: no parameter store bound");
  const int idx = store_ro_->index_of(name);
  if (idx < 0) throw std::invalid_argument("unknown parameter: " + name);
  const Tensor& t = store_ro_->at(static_cast<std::size_t>(idx)).value;
  if (!t.is_matrix() || row >= t.rows()) {
    throw std::invalid_argument("param_row: bad row for " + name);
  }
  auto key = std::make_pair(idx, row);
  auto it = param_nodes_.find(key);
  if (it != param_nodes_.end()) return it->second;
  const std::size_t c = t.cols();
  Node n;
  n.op = Op::ParamRowRef;
  n.param_index = idx;
  n.aux = row;
  n.value = Tensor::zeros({c});
  for (std::size_t j = 0; j < c; ++j) n.value.data[j] = t.at(row, j);
  VarId id = push(std::move(n));
  param_nodes_[key] = id;
  return id;
}

VarId Tape::matvec(VarId w, VarId x) {
  check(w);
  check(x);
  Node n;
  n.op = Op::MatVec;
  n.inputs = {w, x};
  eadgen::matvec(val(w), val(x), n.value);
  return push(std::move(n));
}

VarId Tape::add(VarId a, VarId b) {
  check(a);
  check(b);
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  if (!ta.same_shape(tb)) {
    throw std::invalid_argument("add: shape mismatch " + ta.shape_str() +
                                " vs " + tb.shape_str());
  }
  Node n;
  n.op = Op::Add;
  n.inputs = {a, b};
  n.value = ta;
  for (std::size_t i = 0; i < tb.size(); ++i) n.value.data[i] += tb.data[i];
  return push(std::move(n));
}

VarId Tape::hadamard(VarId a, VarId b) {
  check(a);
  check(b);
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  if (!ta.same_shape(tb)) {
    throw std::invalid_argument("hadamard: shape mismatch " + ta.shape_str() +
                                " vs " + tb.shape_str());
  }
  Node n;
  n.op = Op::Hadamard;
  n.inputs = {a, b};
  n.value = ta;
  for (std::size_t i = 0; i < tb.size(); ++i) n.value.data[i] *= tb.data[i];
  return push(std::move(n));
}

VarId Tape::scale(VarId s, VarId v) {
  check(s);
  check(v);
  if (!val(s).is_scalar()) throw std::invalid_argument("scale: gate not scalar");
  Node n;
  n.op = Op::Scale;
  n.inputs = {s, v};
  n.value = val(v);
  const double f = val(s).data[0];
  for (double& x : n.value.data) x *= f;
  return push(std::move(n));
}

VarId Tape::sigmoid(VarId a) {
  check(a);
  Node n;
  n.op = Op::Sigmoid;
  n.inputs = {a};
  n.value = val(a);
  for (double& x : n.value.data) x = eadgen::sigmoid(x);
  return push(std::move(n));
}

VarId Tape::tanh(VarId a) {
  check(a);
  Node n;
  n.op = Op::Tanh;
  n.inputs = {a};
  n.value = val(a);
  for (double& x : n.value.data) x = std::tanh(x);
  return push(std::move(n));
}

VarId Tape::concat(VarId a, VarId b) {
  check(a);
  check(b);
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  Node n;
  n.op = Op::Concat;
  n.inputs = {a, b};
  n.value = Tensor::zeros({ta.size() + tb.size()});
  for (std::size_t i = 0; i < ta.size(); ++i) n.value.data[i] = ta.data[i];
  for (std::size_t i = 0; i < tb.size(); ++i) {
    n.value.data[ta.size() + i] = tb.data[i];
  }
  return push(std::move(n));
}

VarId Tape::dot(VarId a, VarId b) {
  check(a);
  check(b);
  const Tensor& ta = val(a);
  const Tensor& tb = val(b);
  if (ta.size() != tb.size()) throw std::invalid_argument("dot: size mismatch");
  Node n;
  n.op = Op::Dot;
  n.inputs = {a, b};
  n.value = Tensor::scalar(eadgen::dot(ta, tb));
  return push(std::move(n));
}

VarId Tape::pack(const std::vector<VarId>& scalars) {
  Node n;
  n.op = Op::Pack;
  n.inputs = scalars;
  n.value = Tensor::zeros({scalars.size()});
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    check(scalars[i]);
    if (!val(scalars[i]).is_scalar()) {
      throw std::invalid_argument("pack: non-scalar input");
    }
    n.value.data[i] = val(scalars[i]).data[0];
  }
  return push(std::move(n));
}

VarId Tape::weighted_sum(VarId weights, const std::vector<VarId>& vs) {
  check(weights);
  const Tensor& w = val(weights);
  if (w.size() != vs.size()) {
    throw std::invalid_argument("weighted_sum: weight count mismatch");
  }
  if (vs.empty()) throw std::invalid_argument("weighted_sum: no vectors");
  Node n;
  n.op = Op::WeightedSum;
  n.inputs.reserve(vs.size() + 1);
  n.inputs.push_back(weights);
  n.value = Tensor::zeros(val(vs[0]).shape);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    check(vs[i]);
    n.inputs.push_back(vs[i]);
    axpy(w.data[i], val(vs[i]), n.value);
  }
  return push(std::move(n));
}

VarId Tape::softmax(VarId v) {
  check(v);
  Node n;
  n.op = Op::Softmax;
  n.inputs = {v};
  n.value = eadgen::softmax(val(v));
  return push(std::move(n));
}

VarId Tape::log_softmax(VarId v) {
  check(v);
  Node n;
  n.op = Op::LogSoftmax;
  n.inputs = {v};
  n.value = eadgen::log_softmax(val(v));
  return push(std::move(n));
}

VarId Tape::pick(VarId v, std::size_t index) {
  check(v);
  if (index >= val(v).size()) throw std::invalid_argument("pick: out of range");
  Node n;
  n.op = Op::Pick;
  n.inputs = {v};
  n.aux = index;
  n.value = Tensor::scalar(val(v).data[index]);
  return push(std::move(n));
}

VarId Tape::neg(VarId a) {
  check(a);
  Node n;
  n.op = Op::Neg;
  n.inputs = {a};
  n.value = val(a);
  for (double& x : n.value.data) x = -x;
  return push(std::move(n));
}

VarId Tape::sum(const std::vector<VarId>& scalars) {
  if (scalars.empty()) throw std::invalid_argument("sum: no inputs");
  Node n;
  n.op = Op::Sum;
  n.inputs = scalars;
  double acc = 0.0;
  for (VarId id : scalars) {
    check(id);
    if (!val(id).is_scalar()) throw std::invalid_argument("sum: non-scalar");
    acc += val(id).data[0];
  }
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

VarId Tape::gru_blend(VarId u, VarId h_prev, VarId h_cand) {
  check(u);
  check(h_prev);
  check(h_cand);
  const Tensor& tu = val(u);
  const Tensor& tp = val(h_prev);
  const Tensor& tc = val(h_cand);
  if (!tu.same_shape(tp) || !tu.same_shape(tc)) {
    throw std::invalid_argument("gru_blend: shape mismatch");
  }
  Node n;
  n.op = Op::GruBlend;
  n.inputs = {u, h_prev, h_cand};
  n.value = Tensor::zeros(tu.shape);
  for (std::size_t i = 0; i < tu.size(); ++i) {
    n.value.data[i] =
        tu.data[i] * tp.data[i] + (1.0 - tu.data[i]) * tc.data[i];
  }
  return push(std::move(n));
}

VarId Tape::l2_penalty(double coeff) {
  if (!store_ro_) throw std::logic_error("tape: no parameter store bound");
  Node n;
  n.op = Op::L2Penalty;
  n.coeff = coeff;
  double acc = 0.0;
  for (const Param& p : store_ro_->all()) {
    for (double v : p.value.data) acc += v * v;
  }
  n.value = Tensor::scalar(coeff * acc);
  return push(std::move(n));
}

void Tape::backward(VarId loss) {
  check(loss);
  if (!value(loss).is_scalar()) {
    throw std::invalid_argument("backward: loss is not a scalar");
  }
  if (!store_) {
    throw std::logic_error("backward: tape is bound to a read-only store");
  }
  node(loss).grad.data[0] = 1.0;
  for (std::size_t k = nodes_.size(); k-- > 0;) {
    backprop_node(k);
  }
  clear();
}

void Tape::backprop_node(std::size_t i) {
  Node& n = nodes_[i];
  const Tensor& gy = n.grad;
  switch (n.op) {
    case Op::Constant:
      break;
    case Op::ParamRef: {
      Tensor& g = store_->at(static_cast<std::size_t>(n.param_index)).grad;
      for (std::size_t j = 0; j < gy.size(); ++j) g.data[j] += gy.data[j];
      break;
    }
    case Op::ParamRowRef: {
      Param& p = store_->at(static_cast<std::size_t>(n.param_index));
      const std::size_t c = p.value.cols();
      for (std::size_t j = 0; j < c; ++j) p.grad.at(n.aux, j) += gy.data[j];
      break;
    }
    case Op::MatVec: {
      const Tensor& w = val(n.inputs[0]);
      const Tensor& x = val(n.inputs[1]);
      outer_acc(gy, x, node(n.inputs[0]).grad);
      matvec_transposed_acc(w, gy, node(n.inputs[1]).grad);
      break;
    }
    case Op::Add: {
      for (VarId in : n.inputs) {
        Tensor& g = node(in).grad;
        for (std::size_t j = 0; j < gy.size(); ++j) g.data[j] += gy.data[j];
      }
      break;
    }
    case Op::Hadamard: {
      const Tensor& a = val(n.inputs[0]);
      const Tensor& b = val(n.inputs[1]);
      Tensor& ga = node(n.inputs[0]).grad;
      Tensor& gb = node(n.inputs[1]).grad;
      for (std::size_t j = 0; j < gy.size(); ++j) {
        ga.data[j] += gy.data[j] * b.data[j];
        gb.data[j] += gy.data[j] * a.data[j];
      }
      break;
    }
    case Op::Scale: {
      const double s = val(n.inputs[0]).data[0];
      const Tensor& v = val(n.inputs[1]);
      Tensor& gs = node(n.inputs[0]).grad;
      Tensor& gv = node(n.inputs[1]).grad;
      for (std::size_t j = 0; j < gy.size(); ++j) {
        gs.data[0] += gy.data[j] * v.data[j];
        gv.data[j] += gy.data[j] * s;
      }
      break;
    }
    case Op::Sigmoid: {
      Tensor& ga = node(n.inputs[0]).grad;
      for (std::size_t j = 0; j < gy.size(); ++j) {
        const double y = n.value.data[j];
        ga.data[j] += gy.data[j] * y * (1.0 - y);
      }
      break;
    }
    case Op::Tanh: {
      Tensor& ga = node(n.inputs[0]).grad;
      for (std::size_t j = 0; j < gy.size(); ++j) {
        const double y = n.value.data[j];
        ga.data[j] += gy.data[j] * (1.0 - y * y);
      }
      break;
    }
    case Op::Concat: {
      Tensor& ga = node(n.inputs[0]).grad;
      Tensor& gb = node(n.inputs[1]).grad;
      const std::size_t na = ga.size();
      for (std::size_t j = 0; j < na; ++j) ga.data[j] += gy.data[j];
      for (std::size_t j = 0; j < gb.size(); ++j) {
        gb.data[j] += gy.data[na + j];
      }
      break;
    }
    case Op::Dot: {
      const double g = gy.data[0];
      const Tensor& a = val(n.inputs[0]);
      const Tensor& b = val(n.inputs[1]);
      Tensor& ga = node(n.inputs[0]).grad;
      Tensor& gb = node(n.inputs[1]).grad;
      for (std::size_t j = 0; j < a.size(); ++j) {
        ga.data[j] += g * b.data[j];
        gb.data[j] += g * a.data[j];
      }
      break;
    }
    case Op::Pack: {
      for (std::size_t j = 0; j < n.inputs.size(); ++j) {
        node(n.inputs[j]).grad.data[0] += gy.data[j];
      }
      break;
    }
    case Op::WeightedSum: {
      const Tensor& w = val(n.inputs[0]);
      Tensor& gw = node(n.inputs[0]).grad;
      for (std::size_t k = 1; k < n.inputs.size(); ++k) {
        const Tensor& v = val(n.inputs[k]);
        Tensor& gv = node(n.inputs[k]).grad;
        double acc = 0.0;
        const double wk = w.data[k - 1];
        for (std::size_t j = 0; j < gy.size(); ++j) {
          acc += gy.data[j] * v.data[j];
          gv.data[j] += gy.data[j] * wk;
        }
        gw.data[k - 1] += acc;
      }
      break;
    }
    case Op::Softmax: {
      Tensor& gv = node(n.inputs[0]).grad;
      double inner = 0.0;
      for (std::size_t j = 0; j < gy.size(); ++j) {
        inner += gy.data[j] * n.value.data[j];
      }
      for (std::size_t j = 0; j < gy.size(); ++j) {
        gv.data[j] += n.value.data[j] * (gy.data[j] - inner);
      }
      break;
    }
    case Op::LogSoftmax: {
      Tensor& gv = node(n.inputs[0]).grad;
      double gsum = 0.0;
      for (std::size_t j = 0; j < gy.size(); ++j) gsum += gy.data[j];
      for (std::size_t j = 0; j < gy.size(); ++j) {
        gv.data[j] += gy.data[j] - std::exp(n.value.data[j]) * gsum;
      }
      break;
    }
    case Op::Pick: {
      node(n.inputs[0]).grad.data[n.aux] += gy.data[0];
      break;
    }
    case Op::Neg: {
      Tensor& ga = node(n.inputs[0]).grad;
      for (std::size_t j = 0; j < gy.size(); ++j) ga.data[j] -= gy.data[j];
      break;
    }
    case Op::Sum: {
      for (VarId in : n.inputs) node(in).grad.data[0] += gy.data[0];
      break;
    }
    case Op::GruBlend: {
      const Tensor& u = val(n.inputs[0]);
      const Tensor& hp = val(n.inputs[1]);
      const Tensor& hc = val(n.inputs[2]);
      Tensor& gu = node(n.inputs[0]).grad;
      Tensor& gp = node(n.inputs[1]).grad;
      Tensor& gc = node(n.inputs[2]).grad;
      for (std::size_t j = 0; j < gy.size(); ++j) {
        gu.data[j] += gy.data[j] * (hp.data[j] - hc.data[j]);
        gp.data[j] += gy.data[j] * u.data[j];
        gc.data[j] += gy.data[j] * (1.0 - u.data[j]);
      }
      break;
    }
    case Op::L2Penalty: {
      const double g = gy.data[0] * 2.0 * n.coeff;
      if (g == 0.0) break;
      for (Param& p : store_->all()) {
        for (std::size_t j = 0; j < p.value.size(); ++j) {
          p.grad.data[j] += g * p.value.data[j];
        }
      }
      break;
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  param_nodes_.clear();
}

}  // namespace eadgen
