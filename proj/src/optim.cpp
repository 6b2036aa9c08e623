#include "mem2seq/optim.hpp"

#include <algorithm>
#include <cmath>

namespace m2s {

void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t step, const AdamState& cfg) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
    throw ShapeError("adam_update: buffer sizes disagree");
  }
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double gi = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    theta[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void adam_step(ParameterStore& params, AdamState& state) {
  const std::uint64_t step = state.t + 1;
  for (Parameter& p : params) {
    require_same_shape(p.value, p.grad, "adam_step gradient");
    auto [it, fresh] = state.moments.try_emplace(p.name);
    if (fresh) {
      it->second.m = Tensor::zeros_like(p.value);
      it->second.v = Tensor::zeros_like(p.value);
    }
    require_same_shape(p.value, it->second.m, "adam_step first moment");
    require_same_shape(p.value, it->second.v, "adam_step second moment");
    adam_update(p.value.values(), p.grad.values(), it->second.m.values(), it->second.v.values(), step,
                state);
  }
  state.t = step;
}

double clip_grad_norm(ParameterStore& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter& p : params) {
    for (double gv : p.grad.values()) sq += gv * gv;
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("gradient norm is not finite");
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (Parameter& p : params) {
      for (double& gv : p.grad.values()) gv *= factor;
    }
  }
  return norm;
}

namespace {

double evaluate(const LossBuilder& loss) {
  Graph g;
  const double value = g.value(loss(g))[0];
  if (!std::isfinite(value)) throw NumericError("grad_check: loss is not finite");
  return value;
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss, ParameterStore& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grad_check step must be positive");
  params.zero_grad();
  {
    Graph g;
    Var out = loss(g);
    if (!std::isfinite(g.value(out)[0])) throw NumericError("grad_check: loss is not finite");
    g.backward(out);
  }

  GradCheckReport report;
  for (Parameter& p : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double original = p.value[i];
      p.value[i] = original + h;
      const double plus = evaluate(loss);
      p.value[i] = original - h;
      const double minus = evaluate(loss);
      p.value[i] = original;

      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = p.grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      const double rel = std::abs(analytic - numeric) / denom;
      ++report.coordinates;
      if (rel > report.max_relative_error || report.coordinates == 1) {
        report.max_relative_error = rel;
        report.worst_parameter = p.name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  params.zero_grad();
  return report;
}

}  // namespace m2s
