#ifndef KPSEQ_OPTIMIZER_HPP_
#define KPSEQ_OPTIMIZER_HPP_

#include <limits>
#include <string>
#include <vector>

#include "kpseq/error.hpp"
#include "kpseq/model.hpp"

namespace kpseq::training {

/// Nesterov momentum in the Sutskever/Bengio reparametrization: the stored
/// parameters theta are the lookahead point phi + mu * v, so the gradient
/// passed in is already evaluated there.
///
///   v'     = mu * v - lr * g
///   theta' = theta + mu * v' - lr * g
///
/// which equals theta - mu * v + (1 + mu) * v'. With mu = 0 this is plain SGD.
inline void nesterov_update(Matrix& theta, Matrix& velocity, const Matrix& grad, double lr, double momentum) {
  if (theta.rows() != grad.rows() || theta.cols() != grad.cols() || velocity.rows() != grad.rows() ||
      velocity.cols() != grad.cols())
    throw ShapeError("nesterov_update: parameter, velocity and gradient shapes differ");
  velocity = momentum * velocity - lr * grad;
  theta += momentum * velocity - lr * grad;
}

/// Patience-based annealing: after `patience` consecutive epochs without a
/// strict improvement of the tracked metric, lr is multiplied by `factor`
/// and the counter restarts.
class PlateauSchedule {
 public:
  PlateauSchedule(double lr, std::size_t patience, double factor)
      : lr_(lr), patience_(patience), factor_(factor) {
    if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("anneal factor must lie in (0, 1)");
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  }

  double lr() const { return lr_; }
  double best() const { return best_; }
  std::size_t bad_epochs() const { return bad_epochs_; }

  struct Outcome {
    bool improved = false;
    bool annealed = false;
  };

  Outcome observe(double metric) {
    Outcome o;
    if (metric > best_) {
      best_ = metric;
      bad_epochs_ = 0;
      o.improved = true;
      return o;
    }
    if (++bad_epochs_ >= patience_) {
      lr_ *= factor_;
      bad_epochs_ = 0;
      o.annealed = true;
    }
    return o;
  }

 private:
  double lr_;
  std::size_t patience_;
  double factor_;
  double best_ = -std::numeric_limits<double>::infinity();
  std::size_t bad_epochs_ = 0;
};

/// Velocity per parameter tensor plus the learning-rate schedule (current
/// lr, epochs since improvement, best dev metric).
struct OptimizerState {
  GradientSet velocity;
  PlateauSchedule schedule;
};

inline OptimizerState make_optimizer_state(const ModelParams& params, double lr, std::size_t patience,
                                           double anneal_factor) {
  return {zeros_like(params), PlateauSchedule(lr, patience, anneal_factor)};
}

inline void sgd_nesterov_step(ModelParams& params, const GradientSet& grads, OptimizerState& state, double lr,
                              double momentum) {
  std::vector<Matrix*> theta;
  std::vector<const Matrix*> g;
  std::vector<Matrix*> v;
  params.for_each([&](const std::string&, Matrix& m) { theta.push_back(&m); });
  grads.for_each([&](const std::string&, const Matrix& m) { g.push_back(&m); });
  state.velocity.for_each([&](const std::string&, Matrix& m) { v.push_back(&m); });
  if (theta.size() != g.size() || theta.size() != v.size())
    throw ShapeError("sgd_nesterov_step: tensor count mismatch");
  for (std::size_t k = 0; k < theta.size(); ++k) nesterov_update(*theta[k], *v[k], *g[k], lr, momentum);
}

}  // namespace kpseq::training

#endif  // KPSEQ_OPTIMIZER_HPP_
