#include "eadgen/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace eadgen {

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  Tensor t;
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  t.shape = std::move(shape);
  t.data.assign(n, 0.0);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.shape = {1};
  t.data = {v};
  return t;
}

Tensor Tensor::of(std::initializer_list<double> values) {
  Tensor t;
  t.shape = {values.size()};
  t.data.assign(values.begin(), values.end());
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

void matvec(const Tensor& w, const Tensor& x, Tensor& y) {
  if (!w.is_matrix() || w.cols() != x.size()) {
    throw std::invalid_argument("matvec: shape mismatch " + w.shape_str() +
                                " * " + x.shape_str());
  }
  const std::size_t r = w.rows(), c = w.cols();
  y = Tensor::zeros({r});
  const double* wp = w.data.data();
  const double* xp = x.data.data();
  for (std::size_t i = 0; i < r; ++i) {
    double acc = 0.0;
    const double* row = wp + i * c;
    for (std::size_t j = 0; j < c; ++j) acc += row[j] * xp[j];
    y.data[i] = acc;
  }
}

void matvec_transposed_acc(const Tensor& w, const Tensor& gy, Tensor& gx) {
  const std::size_t r = w.rows(), c = w.cols();
  const double* wp = w.data.data();
  double* gxp = gx.data.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double g = gy.data[i];
    if (g == 0.0) continue;
    const double* row = wp + i * c;
    for (std::size_t j = 0; j < c; ++j) gxp[j] += row[j] * g;
  }
}

void outer_acc(const Tensor& gy, const Tensor& x, Tensor& gw) {
  const std::size_t r = gy.size(), c = x.size();
  double* gwp = gw.data.data();
  const double* xp = x.data.data();
  for (std::size_t i = 0; i < r; ++i) {
    const double g = gy.data[i];
    if (g == 0.0) continue;
    double* row = gwp + i * c;
    for (std::size_t j = 0; j < c; ++j) row[j] += g * xp[j];
  }
}

double dot(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.data[i] * b.data[i];
  return acc;
}

void axpy(double alpha, const Tensor& x, Tensor& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] += alpha * x.data[i];
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor softmax(const Tensor& v) {
  if (v.size() == 0) throw std::invalid_argument("softmax: empty input");
  double m = v.data[0];
  for (double x : v.data) m = std::max(m, x);
  Tensor y = Tensor::zeros({v.size()});
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    y.data[i] = std::exp(v.data[i] - m);
    z += y.data[i];
  }
  for (double& x : y.data) x /= z;
  return y;
}

Tensor log_softmax(const Tensor& v) {
  if (v.size() == 0) throw std::invalid_argument("log_softmax: empty input");
  double m = v.data[0];
  for (double x : v.data) m = std::max(m, x);
  double z = 0.0;
  for (double x : v.data) z += std::exp(x - m);
  const double lse = m + std::log(z);
  Tensor y = Tensor::zeros({v.size()});
  for (std::size_t i = 0; i < v.size(); ++i) y.data[i] = v.data[i] - lse;
  return y;
}

}  // namespace eadgen
