#ifndef COURTQG_GRAD_CHECK_HPP
#define COURTQG_GRAD_CHECK_HPP

#include <functional>
#include <string>
#include <vector>

#include "courtqg/tensor.hpp"

namespace courtqg {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  size_t checked = 0;
};

// Compares analytic gradients of a scalar function against central finite
// differences. f must build the loss on the tape it is handed, pulling
// parameters in via Tape::use(); it is re-evaluated at perturbed parameter
// values, so it must be a pure function of the parameter contents.
//
// Per coordinate: err = |analytic - (f(+h) - f(-h)) / 2h| / max(1, |analytic|).
// Returns the maximum over all coordinates of all listed parameters.
// Throws DomainError identifying the parameter and index if any evaluation
// produces a non-finite value.
GradCheckResult grad_check(const std::function<Tensor(Tape&)>& f,
                           const std::vector<Parameter>& params, double step = 1e-5);

}  // namespace courtqg

#endif  // COURTQG_GRAD_CHECK_HPP
