#ifndef SCOREQ_TRAINING_ADAM_HPP_
#define SCOREQ_TRAINING_ADAM_HPP_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "scoreq/core/autodiff.hpp"

namespace scoreq {

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LearningRates {
  double encoder = 1e-5;
  double head = 1e-3;

  double for_group(ParamGroup g) const { return g == ParamGroup::encoder ? encoder : head; }
};

/// Adam with bias correction, in the PyTorch update form
/// p -= (lr / (1 - b1^t)) * m / (sqrt(v) / sqrt(1 - b2^t) + eps).
class Adam {
 public:
  explicit Adam(std::vector<Parameter*> params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (Parameter* p : params_) {
      m_.emplace_back(p->value.rows(), p->value.cols());
      v_.emplace_back(p->value.rows(), p->value.cols());
    }
  }

  void zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
  }

  void step(const LearningRates& lr) {
    for (Parameter* p : params_) {
      if (!p->grad.all_finite()) throw NonFiniteError("adam_step: non-finite gradient in " + p->name);
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    const double sqrt_bc2 = std::sqrt(bc2);
    for (std::size_t q = 0; q < params_.size(); ++q) {
      Parameter& p = *params_[q];
      const double step_size = lr.for_group(p.group) / bc1;
      Matrix& m = m_[q];
      Matrix& v = v_[q];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad[i];
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
        p.value[i] -= step_size * m[i] / (std::sqrt(v[i]) / sqrt_bc2 + eps_);
      }
    }
  }

  std::size_t steps() const { return step_; }
  const std::vector<Parameter*>& parameters() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  double beta1_, beta2_, eps_;
  std::size_t step_ = 0;
};

}  // namespace scoreq

#endif  // SCOREQ_TRAINING_ADAM_HPP_
