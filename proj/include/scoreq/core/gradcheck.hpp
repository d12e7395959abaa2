#ifndef SCOREQ_CORE_GRADCHECK_HPP_
#define SCOREQ_CORE_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "scoreq/core/autodiff.hpp"

namespace scoreq {

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds a scalar loss on the given tape from the current Parameter values.
using ScalarGraphFn = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

/// Compares tape gradients against central differences for every coordinate
/// of every parameter. Error per coordinate is |analytic - numeric| / max(1, |numeric|).
inline GradCheckResult finite_diff_check(const ScalarGraphFn& fn,
                                         const std::vector<Parameter*>& params,
                                         double step = 1e-5) {
  if (!(step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be > 0");
  auto evaluate = [&]() {
    Tape tape;
    const double v = fn(tape).value()[0];
    if (!std::isfinite(v)) throw EvaluationError("finite_diff_check: non-finite loss");
    return v;
  };

  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = fn(tape);
    if (!std::isfinite(loss.value()[0])) throw EvaluationError("finite_diff_check: non-finite loss");
    tape.backward(loss);
  }

  GradCheckResult result;
  for (Parameter* p : params) {
    const Matrix analytic = p->grad;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + step;
      const double plus = evaluate();
      p->value[i] = orig - step;
      const double minus = evaluate();
      p->value[i] = orig;
      const double numeric = (plus - minus) / (2.0 * step);
      const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      result.max_relative_error = std::max(result.max_relative_error, err);
      ++result.coordinates;
    }
  }
  return result;
}

}  // namespace scoreq

#endif  // SCOREQ_CORE_GRADCHECK_HPP_
