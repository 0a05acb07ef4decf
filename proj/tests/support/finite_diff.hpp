#pragma once

// Central-difference gradient oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "pml/grid.hpp"
#include "pml/model.hpp"

namespace fd {

// d(value)/d(entry) for every entry of `point`, via (f(x+h) - f(x-h)) / 2h.
template <typename F>
pml::Matrix gradient(const pml::Matrix& point, F value_at, double step = 1e-5) {
  pml::Matrix grad(point.rows(), point.cols());
  pml::Matrix probe = point;
  for (std::size_t i = 0; i < point.rows(); ++i)
    for (std::size_t j = 0; j < point.cols(); ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + step;
      const double up = value_at(probe);
      probe(i, j) = saved - step;
      const double down = value_at(probe);
      probe(i, j) = saved;
      grad(i, j) = (up - down) / (2.0 * step);
    }
  return grad;
}

// Guarded relative error; exact zeros on both sides compare equal.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

inline double max_relative_error(const pml::Matrix& analytic, const pml::Matrix& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.rows(); ++i)
    for (std::size_t j = 0; j < analytic.cols(); ++j)
      worst = std::max(worst, relative_error(analytic(i, j), numeric(i, j)));
  return worst;
}

// All parameter tensors of a model as flat spans, in a fixed order.
inline std::vector<std::span<double>> param_spans(pml::ModelParams& params) {
  std::vector<std::span<double>> spans;
  if (params.config.arch == pml::Arch::Mlp1) {
    spans.push_back(params.hidden_weight.flat());
    spans.push_back(params.hidden_bias);
  }
  spans.push_back(params.output_weight.flat());
  spans.push_back(params.output_bias);
  return spans;
}

inline std::vector<std::span<const double>> grad_spans(const pml::ParamGrads& grads, pml::Arch arch) {
  std::vector<std::span<const double>> spans;
  if (arch == pml::Arch::Mlp1) {
    spans.push_back(grads.hidden_weight.flat());
    spans.push_back(grads.hidden_bias);
  }
  spans.push_back(grads.output_weight.flat());
  spans.push_back(grads.output_bias);
  return spans;
}

// Worst relative error between analytic parameter gradients and central
// differences of a scalar loss evaluated at perturbed parameters.
template <typename LossAt>
double max_param_grad_error(pml::ModelParams params, const pml::ParamGrads& analytic, LossAt loss_at,
                            double step = 1e-5) {
  const auto spans = param_spans(params);
  const auto grads = grad_spans(analytic, params.config.arch);
  double worst = 0.0;
  for (std::size_t t = 0; t < spans.size(); ++t)
    for (std::size_t k = 0; k < spans[t].size(); ++k) {
      const double saved = spans[t][k];
      spans[t][k] = saved + step;
      const double up = loss_at(params);
      spans[t][k] = saved - step;
      const double down = loss_at(params);
      spans[t][k] = saved;
      worst = std::max(worst, relative_error(grads[t][k], (up - down) / (2.0 * step)));
    }
  return worst;
}

}  // namespace fd
