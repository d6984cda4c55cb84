// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "handact/nn/tensor.hpp"

namespace handact::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool passed = true;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Entries below this magnitude are compared absolutely rather than relatively.
  double floor = 1e-4;
  /// 0 checks every entry; otherwise a seeded sample of this many per parameter.
  std::size_t max_entries_per_parameter = 0;
  std::uint64_t seed = 0;
};

double relative_error(double analytic, double numeric, double floor);

/// Compares analytic gradients against central differences.
/// `loss` evaluates the scalar objective at the current parameter values.
/// `analytic` must zero the gradients, run forward and backward, and leave
/// d loss / d p in every parameter's grad buffer.
GradCheckReport gradient_check(const ParameterList& params, const std::function<double()>& loss,
                               const std::function<void()>& analytic,
                               const GradCheckOptions& options = {});

/// Same comparison for the gradient with respect to a plain input tensor.
GradCheckReport input_gradient_check(Tensor& input, const Tensor& analytic_grad,
                                     const std::function<double()>& loss,
                                     const GradCheckOptions& options = {});

}  // namespace handact::nn
