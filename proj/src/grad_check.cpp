#include "courtqg/grad_check.hpp"

#include <cmath>

namespace courtqg {

namespace {

double eval_scalar(const std::function<Tensor(Tape&)>& f, const Parameter& p, size_t idx) {
  Tape tape;
  Tensor loss = f(tape);
  if (loss.size() != 1) throw DimensionError("grad_check: f must return a scalar");
  const double v = loss.value()[0];
  if (!std::isfinite(v))
    throw DomainError("grad_check: non-finite loss while perturbing parameter '" + p.name +
                      "' at index " + std::to_string(idx));
  return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<Tensor(Tape&)>& f,
                           const std::vector<Parameter>& params, double step) {
  // Analytic pass.
  std::vector<std::vector<double>> analytic;
  {
    for (const auto& p : params) {
      p.node->ensure_grad();
      p.node->zero_grad();
    }
    Tape tape;
    Tensor loss = f(tape);
    if (loss.size() != 1) throw DimensionError("grad_check: f must return a scalar");
    if (!std::isfinite(loss.value()[0]))
      throw DomainError("grad_check: non-finite loss at the unperturbed point");
    tape.backward(loss);
    analytic.reserve(params.size());
    for (const auto& p : params) {
      p.node->ensure_grad();
      analytic.push_back(p.node->grad);
    }
  }

  GradCheckResult result;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    const Parameter& p = params[pi];
    for (size_t i = 0; i < p.node->size(); ++i) {
      const double saved = p.node->value[i];
      p.node->value[i] = saved + step;
      const double up = eval_scalar(f, p, i);
      p.node->value[i] = saved - step;
      const double down = eval_scalar(f, p, i);
      p.node->value[i] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[pi][i];
      const double err = std::fabs(a - numeric) / std::max(1.0, std::fabs(a));
      ++result.checked;
      if (err > result.max_rel_err) {
        result.max_rel_err = err;
        result.worst_param = p.name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace courtqg
