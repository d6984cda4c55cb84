// SPDX-License-Identifier: Apache-2.0
#include "handact/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "handact/common/rng.hpp"

namespace handact::nn {

namespace {

std::vector<std::size_t> pick_entries(std::size_t n, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit == 0 || limit >= n) return idx;
  for (std::size_t i = 0; i < limit; ++i) {
    std::swap(idx[i], idx[i + rng.below(n - i)]);
  }
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

void compare(GradCheckReport& report, const std::string& name, std::size_t index,
             double analytic, double numeric, double floor) {
  const double err = relative_error(analytic, numeric, floor);
  ++report.checked;
  if (err > report.max_relative_error || !std::isfinite(err)) {
    report.max_relative_error = std::isfinite(err) ? err : HUGE_VAL;
    report.worst_parameter = name;
    report.worst_index = index;
    report.worst_analytic = analytic;
    report.worst_numeric = numeric;
  }
}

double central_difference(double& x, double h, const std::function<double()>& loss) {
  const double saved = x;
  x = saved + h;
  const double plus = loss();
  x = saved - h;
  const double minus = loss();
  x = saved;
  return (plus - minus) / (2.0 * h);
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport gradient_check(const ParameterList& params, const std::function<double()>& loss,
                               const std::function<void()>& analytic,
                               const GradCheckOptions& options) {
  analytic();
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const Parameter* p : params) grads.push_back(p->grad);

  GradCheckReport report;
  Rng rng(options.seed);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    for (std::size_t i : pick_entries(p.value.size(), options.max_entries_per_parameter, rng)) {
      const double numeric = central_difference(p.value[i], options.step, loss);
      compare(report, p.name, i, grads[k][i], numeric, options.floor);
    }
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

GradCheckReport input_gradient_check(Tensor& input, const Tensor& analytic_grad,
                                     const std::function<double()>& loss,
                                     const GradCheckOptions& options) {
  require_shape(analytic_grad, input.shape(), "input gradient check");
  GradCheckReport report;
  Rng rng(options.seed);
  for (std::size_t i : pick_entries(input.size(), options.max_entries_per_parameter, rng)) {
    const double numeric = central_difference(input[i], options.step, loss);
    compare(report, "input", i, analytic_grad[i], numeric, options.floor);
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

}  // namespace handact::nn
