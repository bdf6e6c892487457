#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "rtnet/substrate/error.hpp"
#include "rtnet/substrate/tensor.hpp"

namespace rtnet {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2 = 0.0;
  // (iteration, factor): from that 0-based iteration on, the rate is
  // multiplied by factor.
  std::vector<std::pair<std::size_t, double>> schedule;
};

// Adam with bias correction. L2 is added to the gradient before the moment
// updates (coupled weight decay, as torch.optim.Adam's weight_decay).
template <class T>
class Adam {
 public:
  Adam(ParamList<T> params, AdamConfig cfg) : params_(std::move(params)), cfg_(std::move(cfg)) {
    require(cfg_.learning_rate > 0.0, "adam: learning rate must be positive");
    for (auto* p : params_) {
      first_.emplace_back(p->size(), T(0));
      second_.emplace_back(p->size(), T(0));
    }
  }

  std::size_t steps() const { return steps_; }

  // Rate used by the next call to step().
  double current_learning_rate() const { return rate_at(steps_); }

  double rate_at(std::size_t iteration) const {
    double lr = cfg_.learning_rate;
    for (const auto& [at, factor] : cfg_.schedule) {
      if (iteration >= at) lr *= factor;
    }
    return lr;
  }

  void step() {
    const double lr = rate_at(steps_);
    ++steps_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(steps_));
    const T b1 = static_cast<T>(cfg_.beta1), b2 = static_cast<T>(cfg_.beta2);
    const T l2 = static_cast<T>(cfg_.l2);
    for (std::size_t k = 0; k < params_.size(); ++k) {
      auto& value = params_[k]->value.values();
      const auto& grad = params_[k]->grad.values();
      auto& m = first_[k];
      auto& v = second_[k];
      for (std::size_t i = 0; i < value.size(); ++i) {
        const T g = grad[i] + l2 * value[i];
        m[i] = b1 * m[i] + (T(1) - b1) * g;
        v[i] = b2 * v[i] + (T(1) - b2) * g * g;
        const double m_hat = static_cast<double>(m[i]) / bc1;
        const double v_hat = static_cast<double>(v[i]) / bc2;
        value[i] -= static_cast<T>(lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon));
      }
    }
  }

  const std::vector<std::vector<T>>& first_moments() const { return first_; }
  const std::vector<std::vector<T>>& second_moments() const { return second_; }

 private:
  ParamList<T> params_;
  AdamConfig cfg_;
  std::vector<std::vector<T>> first_;
  std::vector<std::vector<T>> second_;
  std::size_t steps_ = 0;
};

}  // namespace rtnet
