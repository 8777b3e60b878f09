#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ovn/data.hpp"
#include "ovn/kkt.hpp"
#include "ovn/majorization.hpp"
#include "ovn/model.hpp"

namespace ovn {

/// K hyperplanes (w_k, b_k) in the input space.
struct TrainedLinearModel {
  Matrix W;  // K x M, row k is w_k
  Vector b;  // K
  ConstraintMode mode;
  Hyperparameters hp;
  FitDiagnostics diagnostics;

  Index classes() const { return W.rows(); }
  Index features() const { return W.cols(); }

  /// N x K matrix of projections w_k^T x + b_k.
  Matrix scores(const Matrix& x) const {
    if (x.cols() != W.cols())
      throw Error(ErrorKind::DimensionMismatch,
                  "model expects " + std::to_string(W.cols()) + " features, got " + std::to_string(x.cols()));
    return (x * W.transpose()).rowwise() + b.transpose();
  }
};

/// Original (un-majorized) objective with hinge losses. Hard constraints are
/// not penalized here; check them separately with constraint_violation().
inline double objective(const Dataset& ds, const Matrix& W, const Vector& b, const ConstraintMode& mode,
                        const Hyperparameters& hp) {
  if (W.rows() != ds.k() || W.cols() != ds.m() || b.size() != ds.k())
    throw Error(ErrorKind::DimensionMismatch, "objective: model and dataset shapes disagree");
  double loss = 0.0;
  const Matrix s = (ds.features * W.transpose()).rowwise() + b.transpose();
  for (Index i = 0; i < ds.n(); ++i)
    for (Index k = 0; k < ds.k(); ++k)
      if (ds.labels(i, k) != 0) loss += hinge(s(i, k));
  return regularizer_value(W * W.transpose(), b, mode, hp) + hp.beta * loss;
}

/// Largest violation of the active hard constraints (0 when none are active).
inline double constraint_violation(const Matrix& W, const Vector& b, const ConstraintMode& mode) {
  double v = 0.0;
  if (mode.hard_b()) v = std::max(v, std::abs(b.sum()));
  if (mode.hard_w() && W.size() > 0) v = std::max(v, W.colwise().sum().cwiseAbs().maxCoeff());
  return v;
}

/// Builds the quadratic MM subproblem for fixed z. Unknowns are stacked per
/// class as [w_k; b_k], so L = K (M + 1).
///
///   H    = Dt + (alpha/2) D0 + beta Xt  (+ gamma u u^T for soft biases)
///   rhs  = (beta/2) [ sum_{i in C_k} (1 + a_ki) x~_ki ]_k,   a_ki = 1 / z_ki
///
/// Dt repeats D = diag(1,...,1,0) on the diagonal blocks, D0 puts D on every
/// off-diagonal block (soft weights only), Xt holds (1/4) sum a_ki x~ x~^T.
inline AssembledSystem assemble(const Dataset& ds, const ConstraintMode& mode, const Hyperparameters& hp,
                                const PositivePairs& pairs, const Vector& z) {
  const Index K = ds.k(), M = ds.m(), B = M + 1, L = K * B;
  if (z.size() != pairs.size()) throw Error(ErrorKind::DimensionMismatch, "one z per positive pair required");

  AssembledSystem s;
  s.H = Matrix::Zero(L, L);
  s.rhs = Vector::Zero(L);
  for (Index k = 0; k < K; ++k) {
    auto block = s.H.block(k * B, k * B, B, B);
    block.topLeftCorner(M, M).diagonal().array() += 1.0;
    const Index count = pairs.end(k) - pairs.begin(k);
    Matrix xt(count, B);
    Vector a(count);
    for (Index r = 0; r < count; ++r) {
      const Index p = pairs.begin(k) + r;
      xt.row(r).head(M) = ds.features.row(pairs.pattern[static_cast<std::size_t>(p)]);
      xt(r, M) = 1.0;
      a(r) = 1.0 / z(p);
    }
    block.noalias() += (hp.beta / 4.0) * xt.transpose() * a.asDiagonal() * xt;
    s.rhs.segment(k * B, B) = (hp.beta / 2.0) * xt.transpose() * (a.array() + 1.0).matrix();
    if (!mode.hard_w())
      for (Index l = 0; l < K; ++l)
        if (l != k) s.H.block(k * B, l * B, M, M).diagonal().array() += hp.alpha / 2.0;
  }
  if (!mode.hard_b())
    for (Index k = 0; k < K; ++k)
      for (Index l = 0; l < K; ++l) s.H(k * B + M, l * B + M) += hp.gamma;

  const Index c = (mode.hard_w() ? M : 0) + (mode.hard_b() ? 1 : 0);
  s.constraints = Matrix::Zero(L, c);
  Index col = 0;
  if (mode.hard_w())
    for (Index j = 0; j < M; ++j, ++col)
      for (Index k = 0; k < K; ++k) s.constraints(k * B + j, col) = 1.0;
  if (mode.hard_b())
    for (Index k = 0; k < K; ++k) s.constraints(k * B + M, col) = 1.0;
  return s;
}

inline AssembledSystem assemble(const Dataset& ds, const ConstraintMode& mode, const Hyperparameters& hp,
                                const MMState& state) {
  return assemble(ds, mode, hp, PositivePairs::from(ds.labels), state.z);
}

namespace detail {

inline std::string describe(const Hyperparameters& hp, const char* alpha_name) {
  std::ostringstream o;
  o << alpha_name << "=" << hp.alpha << " beta=" << hp.beta << " gamma=" << hp.gamma;
  return o.str();
}

// Margins u_p = w_k^T x_i + b_k over the positive pairs.
inline Vector pair_margins(const Matrix& scores, const PositivePairs& pairs) {
  Vector u(pairs.size());
  for (Index p = 0; p < pairs.size(); ++p)
    u(p) = scores(pairs.pattern[static_cast<std::size_t>(p)], pairs.cls[static_cast<std::size_t>(p)]);
  return u;
}

inline double hinge_sum(const Vector& u) {
  double s = 0.0;
  for (Index p = 0; p < u.size(); ++p) s += hinge(u(p));
  return s;
}

inline double majorizer_sum(const Vector& u, const Vector& z) {
  double s = 0.0;
  for (Index p = 0; p < u.size(); ++p) s += majorizer(u(p), z(p));
  return s;
}

inline bool relative_change_below(double prev, double cur, double tol) {
  return std::abs(cur - prev) / std::max(1.0, std::abs(prev)) < tol;
}

}  // namespace detail

/// Majorization-minimization fit: alternate the KKT solve for the stacked
/// [w_k; b_k] with the closed-form z update until the hinge objective stops
/// changing (relative change < tol) or max_iters is reached. In the latter
/// case the best iterate is returned with diagnostics.converged = false.
inline TrainedLinearModel fit_linear(const Dataset& ds, const ConstraintMode& mode, const Hyperparameters& hp) {
  ds.validate(true);
  hp.validate(mode);
  check_regularizer(ds.k(), mode, hp);

  const Index K = ds.k(), M = ds.m(), B = M + 1;
  const auto pairs = PositivePairs::from(ds.labels);
  MMState state = MMState::initial(pairs.size(), hp.epsilon);

  TrainedLinearModel model{Matrix::Zero(K, M), Vector::Zero(K), mode, hp, {}};
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < hp.max_iters; ++it) {
    KktSolution sol;
    try {
      sol = solve_kkt(assemble(ds, mode, hp, pairs, state.z));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::HessianNotPD) throw;
      throw Error(ErrorKind::HessianNotPD, e.detail() + " (" + detail::describe(hp, "alpha") + ")");
    }
    Matrix W(K, M);
    Vector b(K);
    for (Index k = 0; k < K; ++k) {
      W.row(k) = sol.x.segment(k * B, M).transpose();
      b(k) = sol.x(k * B + M);
    }
    const Vector u = detail::pair_margins((ds.features * W.transpose()).rowwise() + b.transpose(), pairs);
    const double reg = regularizer_value(W * W.transpose(), b, mode, hp);
    state.majorized_trace.push_back(reg + hp.beta * detail::majorizer_sum(u, state.z));
    state.update(u);
    const double obj = reg + hp.beta * detail::hinge_sum(u);
    state.objective_trace.push_back(obj);

    auto& d = model.diagnostics;
    d.iterations_used = it + 1;
    if (obj <= best) {
      best = obj;
      model.W = W;
      model.b = b;
      d.final_objective = obj;
      d.kkt_residual = sol.residual;
    }
    const auto& tr = state.objective_trace;
    if (tr.size() >= 2 && detail::relative_change_below(tr[tr.size() - 2], obj, hp.tol)) {
      d.converged = true;
      model.W = W;
      model.b = b;
      d.final_objective = obj;
      d.kkt_residual = sol.residual;
      break;
    }
  }
  model.diagnostics.objective_trace = std::move(state.objective_trace);
  model.diagnostics.majorized_trace = std::move(state.majorized_trace);
  return model;
}

}  // namespace ovn
