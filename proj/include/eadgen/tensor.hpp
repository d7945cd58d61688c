#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace eadgen {

// Dense row-major 64-bit float tensor. Rank 1 (vectors) and rank 2
// (matrices) cover every value in the generator; the shape vector stays
// generic for the checkpoint format.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor scalar(double v);
  static Tensor of(std::initializer_list<double> values);

  std::size_t size() const { return data.size(); }
  bool is_scalar() const { return data.size() == 1; }
  bool is_vector() const { return shape.size() == 1; }
  bool is_matrix() const { return shape.size() == 2; }

  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  void fill(double v);

  std::string shape_str() const;
};

// y = W x
void matvec(const Tensor& w, const Tensor& x, Tensor& y);
// gx += W^T gy
void matvec_transposed_acc(const Tensor& w, const Tensor& gy, Tensor& gx);
// gW += gy x^T
void outer_acc(const Tensor& gy, const Tensor& x, Tensor& gw);

double dot(const Tensor& a, const Tensor& b);
// y += alpha * x
void axpy(double alpha, const Tensor& x, Tensor& y);

double sigmoid(double x);

// Max-shifted softmax over a non-empty vector. Throws std::invalid_argument
// on an empty input.
Tensor softmax(const Tensor& v);
// v - logsumexp(v), computed with the same max shift.
Tensor log_softmax(const Tensor& v);

}  // namespace eadgen
