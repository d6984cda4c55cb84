// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace handact::nn {

class NnError : public std::runtime_error {
 public:
  enum class Kind {
    ShapeMismatch,
    InvalidRate,
    EmptySequence,
    NonFiniteGradient,
    NonFiniteLoss,
    CheckpointError,
  };

  NnError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

using Shape = std::vector<std::size_t>;

// Eigen peels unaligned heads before vectorised loops, so the summation order of
// a reduction depends on where malloc put the buffer. Fixed alignment keeps
// results bitwise reproducible from run to run.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Storage = std::vector<double, AlignedAllocator<double>>;

std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Leading extent and product of the rest; a [B, ...] tensor viewed as a matrix.
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const { return rows() == 0 ? 0 : data_.size() / rows(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

  void fill(double v);
  bool all_finite() const;
  Tensor reshaped(Shape shape) const;

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

  bool operator==(const Tensor& o) const { return shape_ == o.shape_ && data_ == o.data_; }

 private:
  Shape shape_;
  Storage data_;
};

std::size_t shape_size(const Shape& shape);

/// Throws ShapeMismatch with `what` unless the shapes are equal.
void require_shape(const Tensor& t, const Shape& expected, const char* what);

/// Column-wise concatenation of [B, n_i] tensors.
Tensor concat_cols(const std::vector<const Tensor*>& parts);
/// Inverse of concat_cols for gradients.
std::vector<Tensor> split_cols(const Tensor& t, const std::vector<std::size_t>& widths);

/// Rows `indices` of a [B, ...] tensor, stacked.
Tensor gather_rows(const Tensor& t, std::span<const std::size_t> indices);

void add_inplace(Tensor& dst, const Tensor& src);
double l2_distance(const Tensor& a, const Tensor& b);

/// Trainable value with its gradient buffer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Shape shape) : name(std::move(n)), value(shape), grad(shape) {}

  void zero_grad() { grad.fill(0.0); }
};

using ParameterList = std::vector<Parameter*>;

void zero_grads(const ParameterList& params);
/// Sets every value to zero (useful for analytic checks).
void zero_values(const ParameterList& params);
std::size_t count_scalars(const ParameterList& params);

}  // namespace handact::nn
