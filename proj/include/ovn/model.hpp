#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ovn/data.hpp"
#include "ovn/majorization.hpp"

namespace ovn {

enum class Constraint { soft, hard };

/// Which of the four soft/hard combinations on (weights, biases) is active.
struct ConstraintMode {
  Constraint w = Constraint::soft;
  Constraint b = Constraint::hard;

  bool hard_w() const { return w == Constraint::hard; }
  bool hard_b() const { return b == Constraint::hard; }

  /// "sw-hb" style short name.
  std::string name() const {
    return std::string(hard_w() ? "hw" : "sw") + "-" + (hard_b() ? "hb" : "sb");
  }

  static ConstraintMode parse(const std::string& s) {
    if (s == "sw-sb") return {Constraint::soft, Constraint::soft};
    if (s == "sw-hb") return {Constraint::soft, Constraint::hard};
    if (s == "hw-sb") return {Constraint::hard, Constraint::soft};
    if (s == "hw-hb") return {Constraint::hard, Constraint::hard};
    throw Error(ErrorKind::UnknownKind, "unknown constraint mode '" + s + "'");
  }

  static constexpr ConstraintMode soft_w_hard_b() { return {Constraint::soft, Constraint::hard}; }
  static constexpr ConstraintMode hard_w_hard_b() { return {Constraint::hard, Constraint::hard}; }

  friend bool operator==(const ConstraintMode&, const ConstraintMode&) = default;
};

inline const ConstraintMode kAllModes[4] = {
    {Constraint::soft, Constraint::soft},
    {Constraint::soft, Constraint::hard},
    {Constraint::hard, Constraint::soft},
    {Constraint::hard, Constraint::hard},
};

/// Objective coefficients and iteration controls.
///
/// The objective minimized by both solvers is
///   sum_k |w_k|^2 + alpha * sum_{k<l} <w_k, w_l> + gamma * (sum_k b_k)^2
///     + beta * sum_k sum_{i in C_k} [1 - (<w_k, x_i> + b_k)]_+
/// with the alpha term present only for soft weights and the gamma term only
/// for soft biases. Hard weights impose sum_k w_k = 0, hard biases sum_k b_k = 0.
/// In kernel mode alpha plays the role usually written theta.
struct Hyperparameters {
  double alpha = 0.5;
  double beta = 1.0;
  double gamma = 1.0;
  double epsilon = kDefaultEpsilon;
  int max_iters = 500;
  double tol = 1e-8;

  void validate(const ConstraintMode& mode) const {
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be > 0");
    if (!mode.hard_b() && !(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be > 0 for soft biases");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be > 0");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be > 0");
    if (max_iters < 1) throw Error(ErrorKind::InvalidArgument, "max_iters must be >= 1");
    if (!std::isfinite(alpha)) throw Error(ErrorKind::InvalidArgument, "alpha must be finite");
  }

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

/// K x K coupling P with regularizer sum_{k,l} P_kl <w_k, w_l>:
/// unit diagonal, alpha/2 off the diagonal for soft weights, identity otherwise.
inline Matrix coupling_matrix(Index classes, const ConstraintMode& mode, double alpha) {
  Matrix p = Matrix::Identity(classes, classes);
  if (!mode.hard_w())
    for (Index k = 0; k < classes; ++k)
      for (Index l = 0; l < classes; ++l)
        if (k != l) p(k, l) = alpha / 2.0;
  return p;
}

/// Smallest eigenvalue of the weight regularizer on the feasible set. The
/// hinge term grows only linearly, so a negative value makes the objective
/// unbounded below.
inline double regularizer_min_curvature(Index classes, const ConstraintMode& mode, double alpha) {
  if (mode.hard_w() || classes < 2) return 1.0;
  return std::min(1.0 - alpha / 2.0, 1.0 + alpha * static_cast<double>(classes - 1) / 2.0);
}

inline void check_regularizer(Index classes, const ConstraintMode& mode, const Hyperparameters& hp,
                              const std::string& alpha_name = "alpha") {
  const double c = regularizer_min_curvature(classes, mode, hp.alpha);
  if (c < -1e-12) {
    std::ostringstream msg;
    msg << "weight regularizer is indefinite for " << alpha_name << "=" << hp.alpha << " with K=" << classes
        << " (curvature " << c << "); feasible range is [" << -2.0 / static_cast<double>(classes - 1) << ", 2]";
    throw Error(ErrorKind::HessianNotPD, msg.str());
  }
}

/// Regularizer value given the K x K matrix of weight inner products.
inline double regularizer_value(const Matrix& inner, const Vector& b, const ConstraintMode& mode,
                                const Hyperparameters& hp) {
  double v = inner.trace();
  if (!mode.hard_w())
    for (Index k = 0; k < inner.rows(); ++k)
      for (Index l = k + 1; l < inner.cols(); ++l) v += hp.alpha * inner(k, l);
  if (!mode.hard_b()) v += hp.gamma * b.sum() * b.sum();
  return v;
}

/// Bookkeeping shared by trained models.
struct FitDiagnostics {
  int iterations_used = 0;
  double final_objective = std::numeric_limits<double>::quiet_NaN();
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  std::vector<double> objective_trace;
  std::vector<double> majorized_trace;
};

}  // namespace ovn
