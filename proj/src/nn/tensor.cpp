// SPDX-License-Identifier: Apache-2.0
#include "handact/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace handact::nn {

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(values.begin(), values.end()) {
  if (data_.size() != shape_size(shape_)) {
    throw NnError(NnError::Kind::ShapeMismatch, "tensor data of length " +
                                                    std::to_string(data_.size()) +
                                                    " does not fit shape " + shape_string(shape_));
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw NnError(NnError::Kind::ShapeMismatch,
                  "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

void require_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape() != expected) {
    throw NnError(NnError::Kind::ShapeMismatch, std::string(what) + ": expected " +
                                                    shape_string(expected) + ", got " +
                                                    shape_string(t.shape()));
  }
}

Tensor concat_cols(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) return {};
  const std::size_t batch = parts.front()->rows();
  std::size_t width = 0;
  for (const Tensor* p : parts) {
    if (p->rows() != batch) {
      throw NnError(NnError::Kind::ShapeMismatch, "concat: batch sizes differ");
    }
    width += p->cols();
  }
  Tensor out({batch, width});
  for (std::size_t b = 0; b < batch; ++b) {
    double* dst = out.data() + b * width;
    for (const Tensor* p : parts) {
      const std::size_t w = p->cols();
      if (w) std::memcpy(dst, p->data() + b * w, w * sizeof(double));
      dst += w;
    }
  }
  return out;
}

std::vector<Tensor> split_cols(const Tensor& t, const std::vector<std::size_t>& widths) {
  const std::size_t total = std::accumulate(widths.begin(), widths.end(), std::size_t{0});
  if (total != t.cols()) {
    throw NnError(NnError::Kind::ShapeMismatch, "split: widths do not add up to " +
                                                    std::to_string(t.cols()));
  }
  std::vector<Tensor> out;
  out.reserve(widths.size());
  for (std::size_t w : widths) out.emplace_back(Shape{t.rows(), w});
  for (std::size_t b = 0; b < t.rows(); ++b) {
    const double* src = t.data() + b * total;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      if (widths[i]) std::memcpy(out[i].data() + b * widths[i], src, widths[i] * sizeof(double));
      src += widths[i];
    }
  }
  return out;
}

Tensor gather_rows(const Tensor& t, std::span<const std::size_t> indices) {
  Shape shape = t.shape();
  shape[0] = indices.size();
  Tensor out(shape);
  const std::size_t w = t.cols();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::memcpy(out.data() + i * w, t.data() + indices[i] * w, w * sizeof(double));
  }
  return out;
}

void add_inplace(Tensor& dst, const Tensor& src) {
  if (dst.size() != src.size()) {
    throw NnError(NnError::Kind::ShapeMismatch, "add: " + shape_string(dst.shape()) + " vs " +
                                                    shape_string(src.shape()));
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

double l2_distance(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void zero_grads(const ParameterList& params) {
  for (Parameter* p : params) p->zero_grad();
}

void zero_values(const ParameterList& params) {
  for (Parameter* p : params) p->value.fill(0.0);
}

std::size_t count_scalars(const ParameterList& params) {
  std::size_t n = 0;
  for (const Parameter* p : params) n += p->value.size();
  return n;
}

}  // namespace handact::nn
