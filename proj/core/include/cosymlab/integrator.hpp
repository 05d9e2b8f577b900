#pragma once

#include <cstddef>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace cosymlab {

/// Dormand-Prince 8(5,3) with step-size control and 7th-order dense output
/// for autonomous systems y' = f(y). Integrates forward or backward in time.
class Dop853 {
 public:
  using State = Eigen::VectorXd;
  using Rhs = std::function<State(const State&)>;

  struct Options {
    double rtol = 1e-10;
    double atol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 10'000'000;
  };

  Dop853(Rhs f, Options options);

  void reset(double t, State y);

  /// Takes one accepted step towards t_end without passing it. `step_cap`
  /// bounds |h| for this step only. Throws kStepUnderflow.
  void step(double t_end, double step_cap = std::numeric_limits<double>::infinity());

  /// Steps until t_end is reached; returns y(t_end).
  const State& integrate(double t_end);

  double t() const { return t_; }
  const State& y() const { return y_; }
  double t_prev() const { return t_prev_; }
  const State& y_prev() const { return y_prev_; }
  /// Derivative f(y) at the current point.
  const State& dy() const { return f_y_; }
  std::size_t accepted_steps() const { return accepted_; }
  std::size_t rejected_steps() const { return rejected_; }

  /// Dense output on [t_prev, t] of the last accepted step.
  State dense(double t) const;

 private:
  double initial_step(double direction) const;
  void prepare_dense() const;

  Rhs f_;
  Options opt_;
  double t_ = 0.0, t_prev_ = 0.0;
  State y_, y_prev_, f_y_;
  double h_ = 0.0;
  bool last_rejected_ = false;
  std::size_t accepted_ = 0, rejected_ = 0;

  // Stages of the last accepted step (1-based naming; index 0 unused).
  State s_[17];
  mutable bool dense_ready_ = false;
  mutable State r_[8];
};

}  // namespace cosymlab
