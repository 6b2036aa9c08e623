#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>

#include "mem2seq/graph.hpp"

namespace m2s {

struct AdamState {
  struct Moments {
    Tensor m;
    Tensor v;
  };

  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::map<std::string, Moments> moments;
};

/// One bias-corrected Adam update of `theta` in place. `step` is the
/// 1-based step index after incrementing.
void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamState& cfg);

/// Applies one Adam step to every parameter in `params` using its grad
/// buffer, creating moment buffers on first use. Increments state.t by one.
void adam_step(ParameterStore& params, AdamState& state);

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(ParameterStore& params, double max_norm);

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Builds a scalar loss on a fresh graph from the current parameter values.
using LossBuilder = std::function<Var(Graph&)>;

/// Compares reverse-mode gradients with central differences
/// (f(θ+h) - f(θ-h)) / 2h for every coordinate of every parameter. The
/// relative error of a coordinate is |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const LossBuilder& loss, ParameterStore& params, double h);

}  // namespace m2s
