#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ovn/kernels.hpp"
#include "ovn/kkt.hpp"
#include "ovn/linear_solver.hpp"
#include "ovn/majorization.hpp"
#include "ovn/model.hpp"

namespace ovn {

/// K functions f_k(x) = sum_i A(k, i) kappa(x_i, x) + b_k over the retained
/// training patterns. Every training pattern contributes (no pruning).
struct TrainedKernelModel {
  Matrix A;  // K x N
  Vector b;  // K
  KernelSpec kernel;
  Matrix train_features;  // N x M
  ConstraintMode mode;
  Hyperparameters hp;
  double ridge = kDefaultGramRidge;
  FitDiagnostics diagnostics;

  Index classes() const { return A.rows(); }

  Matrix scores(const Matrix& x) const {
    const Matrix cross = gram_cross(kernel, train_features, x);  // N x T
    return (cross.transpose() * A.transpose()).rowwise() + b.transpose();
  }
};

/// Same block layout as the linear case with the Gram matrix standing in for
/// the identity: per class the unknowns are [alpha_k; b_k] (length N + 1).
///
///   H   = G~0 + (theta/2) G~1 + beta Xt  (+ gamma on the bias block for soft biases)
///   rhs = (beta/2) [ sum_{i in C_k} (1 + a_ki) g~_i ]_k,   g~_i = [g_i; 1]
///
/// Hard weights add N rows sum_k alpha_ki = 0, hard biases one row sum_k b_k = 0.
inline AssembledSystem assemble_kernel(const Dataset& ds, const GramMatrix& gram, const ConstraintMode& mode,
                                       const Hyperparameters& hp, const PositivePairs& pairs, const Vector& z) {
  const Index K = ds.k(), N = ds.n(), B = N + 1, L = K * B;
  const Matrix& G = gram.values;
  if (G.rows() != N || G.cols() != N) throw Error(ErrorKind::DimensionMismatch, "Gram matrix must be N x N");
  if (z.size() != pairs.size()) throw Error(ErrorKind::DimensionMismatch, "one z per positive pair required");

  AssembledSystem s;
  s.H = Matrix::Zero(L, L);
  s.rhs = Vector::Zero(L);
  for (Index k = 0; k < K; ++k) {
    auto block = s.H.block(k * B, k * B, B, B);
    block.topLeftCorner(N, N) += G;
    const Index count = pairs.end(k) - pairs.begin(k);
    Matrix gt(count, B);
    Vector a(count);
    for (Index r = 0; r < count; ++r) {
      const Index p = pairs.begin(k) + r;
      gt.row(r).head(N) = G.row(pairs.pattern[static_cast<std::size_t>(p)]);
      gt(r, N) = 1.0;
      a(r) = 1.0 / z(p);
    }
    block.noalias() += (hp.beta / 4.0) * gt.transpose() * a.asDiagonal() * gt;
    s.rhs.segment(k * B, B) = (hp.beta / 2.0) * gt.transpose() * (a.array() + 1.0).matrix();
    if (!mode.hard_w())
      for (Index l = 0; l < K; ++l)
        if (l != k) s.H.block(k * B, l * B, N, N) += (hp.alpha / 2.0) * G;
  }
  if (!mode.hard_b())
    for (Index k = 0; k < K; ++k)
      for (Index l = 0; l < K; ++l) s.H(k * B + N, l * B + N) += hp.gamma;

  const Index c = (mode.hard_w() ? N : 0) + (mode.hard_b() ? 1 : 0);
  s.constraints = Matrix::Zero(L, c);
  Index col = 0;
  if (mode.hard_w())
    for (Index i = 0; i < N; ++i, ++col)
      for (Index k = 0; k < K; ++k) s.constraints(k * B + i, col) = 1.0;
  if (mode.hard_b())
    for (Index k = 0; k < K; ++k) s.constraints(k * B + N, col) = 1.0;
  return s;
}

/// How each MM step is solved.
///
/// block_kkt assembles the full K(N+1) system above. reduced eliminates the
/// weights: at a stationary point alpha = (1/2) P^{-1} c with one coefficient
/// c_p per positive pair (P is the class coupling, replaced by the centering
/// projector for hard weights), which leaves the T x T positive definite
/// system (diag(z) + (beta/4) Q) c = (beta/2)(1 + z - E b) plus a K x K bias
/// system. Both produce the same iterates; reduced needs P positive definite.
/// automatic picks reduced whenever P allows it: it is smaller, and the block
/// system loses the Gram ridge to rounding once some z reaches epsilon on a
/// rank-deficient Gram matrix.
enum class KernelSolveStrategy { automatic, block_kkt, reduced };

struct KernelFitOptions {
  double ridge = kDefaultGramRidge;
  KernelSolveStrategy strategy = KernelSolveStrategy::automatic;
};

namespace detail {

struct KernelStep {
  Matrix A;
  Vector b;
  double residual = 0.0;
};

inline KernelStep kernel_step_block(const Dataset& ds, const GramMatrix& gram, const ConstraintMode& mode,
                                    const Hyperparameters& hp, const PositivePairs& pairs, const Vector& z) {
  const Index K = ds.k(), N = ds.n(), B = N + 1;
  const KktSolution sol = solve_kkt(assemble_kernel(ds, gram, mode, hp, pairs, z));
  KernelStep st{Matrix(K, N), Vector(K), sol.residual};
  for (Index k = 0; k < K; ++k) {
    st.A.row(k) = sol.x.segment(k * B, N).transpose();
    st.b(k) = sol.x(k * B + N);
  }
  return st;
}

// Weight map of the reduced solve: alpha_k = (1/2) sum_l coupling(k, l) c_l.
inline Matrix reduced_coupling(Index K, const ConstraintMode& mode, double alpha) {
  if (mode.hard_w()) return Matrix::Identity(K, K) - Matrix::Constant(K, K, 1.0 / static_cast<double>(K));
  const Matrix p = coupling_matrix(K, mode, alpha);
  Eigen::LLT<Matrix> llt;
  if (!robust_llt(p, llt))
    throw Error(ErrorKind::HessianNotPD, "class coupling is singular; reduced solve unavailable");
  return llt.solve(Matrix::Identity(K, K));
}

class ReducedKernelSolver {
 public:
  ReducedKernelSolver(const GramMatrix& gram, const ConstraintMode& mode, const Hyperparameters& hp,
                      const PositivePairs& pairs, Index K)
      : mode_(mode), hp_(hp), pairs_(pairs), K_(K), N_(gram.values.rows()), G_(gram.values) {
    coupling_ = reduced_coupling(K, mode, hp.alpha);
    const Index T = pairs.size();
    Q_.resize(T, T);
    for (Index q = 0; q < T; ++q)
      for (Index p = 0; p < T; ++p)
        Q_(p, q) = coupling_(pairs.cls[static_cast<std::size_t>(p)], pairs.cls[static_cast<std::size_t>(q)]) *
                   G_(pairs.pattern[static_cast<std::size_t>(p)], pairs.pattern[static_cast<std::size_t>(q)]);
    E_ = Matrix::Zero(T, K);
    for (Index p = 0; p < T; ++p) E_(p, pairs.cls[static_cast<std::size_t>(p)]) = 1.0;
  }

  KernelStep step(const Vector& z) const {
    const Index T = pairs_.size();
    Matrix S = (hp_.beta / 4.0) * Q_;
    S.diagonal() += z;
    Eigen::LLT<Matrix> llt;
    if (!robust_llt(S, llt)) throw Error(ErrorKind::HessianNotPD, "reduced system failed Cholesky factorization");
    const Vector r = (z.array() + 1.0).matrix();
    const Vector y0 = llt.solve(r);
    const Matrix Y = llt.solve(E_);
    const double h = hp_.beta / 2.0;

    // Bias conditions: E^T c = 2 gamma (1^T b) 1 + eta 1, with c = h (y0 - Y b).
    Matrix bias_h = h * (E_.transpose() * Y);
    const Vector bias_rhs = h * (E_.transpose() * y0);
    Vector b;
    if (mode_.hard_b()) {
      Matrix kkt = Matrix::Zero(K_ + 1, K_ + 1);
      kkt.topLeftCorner(K_, K_) = bias_h;
      kkt.block(0, K_, K_, 1).setOnes();
      kkt.block(K_, 0, 1, K_).setOnes();
      Vector rhs = Vector::Zero(K_ + 1);
      rhs.head(K_) = bias_rhs;
      b = kkt.partialPivLu().solve(rhs).head(K_);
    } else {
      bias_h.array() += 2.0 * hp_.gamma;
      Eigen::LLT<Matrix> bl;
      if (!robust_llt(bias_h, bl)) throw Error(ErrorKind::HessianNotPD, "bias system is not positive definite");
      b = bl.solve(bias_rhs);
    }
    const Vector c = h * (y0 - Y * b);

    Matrix cmat = Matrix::Zero(K_, N_);
    for (Index p = 0; p < T; ++p)
      cmat(pairs_.cls[static_cast<std::size_t>(p)], pairs_.pattern[static_cast<std::size_t>(p)]) = c(p);
    KernelStep st{0.5 * coupling_ * cmat, b, 0.0};

    // Relative residual of the reduced stationarity conditions.
    Vector res = S * c + h * (E_ * b) - h * r;
    double sq = res.squaredNorm();
    const Vector et_c = E_.transpose() * c;
    if (mode_.hard_b()) {
      sq += (et_c.array() - et_c.mean()).matrix().squaredNorm() + b.sum() * b.sum();
    } else {
      sq += (et_c.array() - 2.0 * hp_.gamma * b.sum()).matrix().squaredNorm();
    }
    st.residual = std::sqrt(sq) / std::max(1.0, h * r.norm());
    return st;
  }

 private:
  ConstraintMode mode_;
  Hyperparameters hp_;
  const PositivePairs& pairs_;
  Index K_, N_;
  const Matrix& G_;
  Matrix coupling_, Q_, E_;
};

inline bool use_block_kkt(const KernelFitOptions& opt, Index K, const ConstraintMode& mode, double alpha) {
  if (opt.strategy == KernelSolveStrategy::block_kkt) return true;
  if (opt.strategy == KernelSolveStrategy::reduced) return false;
  return !mode.hard_w() && regularizer_min_curvature(K, mode, alpha) < 1e-10;
}

}  // namespace detail

/// MM fit in the RKHS from a precomputed training Gram matrix (ridge included).
inline TrainedKernelModel fit_kernel(const Dataset& ds, const GramMatrix& gram, const KernelSpec& kernel,
                                     const ConstraintMode& mode, const Hyperparameters& hp,
                                     const KernelFitOptions& opt = {}) {
  ds.validate(true);
  hp.validate(mode);
  kernel.validate();
  check_regularizer(ds.k(), mode, hp, "theta");
  if (gram.values.rows() != ds.n() || gram.values.cols() != ds.n())
    throw Error(ErrorKind::DimensionMismatch, "Gram matrix must be N x N");

  const Index K = ds.k(), N = ds.n();
  const auto pairs = PositivePairs::from(ds.labels);
  MMState state = MMState::initial(pairs.size(), hp.epsilon);
  const Matrix& G = gram.values;

  TrainedKernelModel model{Matrix::Zero(K, N), Vector::Zero(K), kernel, ds.features, mode, hp, gram.ridge, {}};
  const bool block = detail::use_block_kkt(opt, K, mode, hp.alpha);
  std::optional<detail::ReducedKernelSolver> reduced;
  try {
    if (!block) reduced.emplace(gram, mode, hp, pairs, K);
  } catch (const Error& e) {
    throw Error(e.kind(), e.detail() + " (" + detail::describe(hp, "theta") + ")");
  }

  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < hp.max_iters; ++it) {
    detail::KernelStep st;
    try {
      st = block ? detail::kernel_step_block(ds, gram, mode, hp, pairs, state.z) : reduced->step(state.z);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::HessianNotPD) throw;
      std::ostringstream o;
      o << e.detail() << " (" << detail::describe(hp, "theta") << " ridge=" << gram.ridge << ")";
      throw Error(ErrorKind::HessianNotPD, o.str());
    }
    const Matrix GA = G * st.A.transpose();  // N x K, column k is G alpha_k
    const Vector u = detail::pair_margins(GA.rowwise() + st.b.transpose(), pairs);
    const double reg = regularizer_value(st.A * GA, st.b, mode, hp);
    state.majorized_trace.push_back(reg + hp.beta * detail::majorizer_sum(u, state.z));
    state.update(u);
    const double obj = reg + hp.beta * detail::hinge_sum(u);
    state.objective_trace.push_back(obj);

    auto& d = model.diagnostics;
    d.iterations_used = it + 1;
    const auto& tr = state.objective_trace;
    const bool done = tr.size() >= 2 && detail::relative_change_below(tr[tr.size() - 2], obj, hp.tol);
    if (obj <= best || done) {
      best = std::min(best, obj);
      model.A = st.A;
      model.b = st.b;
      d.final_objective = obj;
      d.kkt_residual = st.residual;
    }
    if (done) {
      d.converged = true;
      break;
    }
  }
  model.diagnostics.objective_trace = std::move(state.objective_trace);
  model.diagnostics.majorized_trace = std::move(state.majorized_trace);
  return model;
}

inline TrainedKernelModel fit_kernel(const Dataset& ds, const KernelSpec& kernel, const ConstraintMode& mode,
                                     const Hyperparameters& hp, const KernelFitOptions& opt = {}) {
  return fit_kernel(ds, gram(kernel, ds.features, opt.ridge), kernel, mode, hp, opt);
}

/// Kernel-space objective (regularizer through alpha^T G alpha plus hinge
/// losses), evaluated with the model's own Gram ridge.
inline double kernel_objective(const Dataset& ds, const TrainedKernelModel& model) {
  const GramMatrix g = gram(model.kernel, model.train_features, model.ridge);
  const Matrix GA = g.values * model.A.transpose();
  const Matrix s = gram_cross(model.kernel, model.train_features, ds.features).transpose() * model.A.transpose();
  double loss = 0.0;
  for (Index i = 0; i < ds.n(); ++i)
    for (Index k = 0; k < ds.k(); ++k)
      if (ds.labels(i, k) != 0) loss += hinge(s(i, k) + model.b(k));
  return regularizer_value(model.A * GA, model.b, model.mode, model.hp) + model.hp.beta * loss;
}

/// max_i |sum_k A(k, i)| and |sum_k b_k| for the active hard constraints.
inline double constraint_violation(const TrainedKernelModel& m) {
  double v = 0.0;
  if (m.mode.hard_b()) v = std::max(v, std::abs(m.b.sum()));
  if (m.mode.hard_w() && m.A.size() > 0) v = std::max(v, m.A.colwise().sum().cwiseAbs().maxCoeff());
  return v;
}

inline constexpr double kDefaultSupportTolerance = 1e-4;

/// Pattern i in C_k is a support vector of class k when its score is at most
/// 1 + tol (on the margin or violating it).
template <class Model>
std::vector<std::vector<Index>> support_vectors(const Model& model, const Dataset& ds,
                                                double tol = kDefaultSupportTolerance) {
  const Matrix s = model.scores(ds.features);
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(ds.k()));
  for (Index k = 0; k < ds.k(); ++k)
    for (Index i = 0; i < ds.n(); ++i)
      if (ds.labels(i, k) != 0 && s(i, k) <= 1.0 + tol) out[static_cast<std::size_t>(k)].push_back(i);
  return out;
}

}  // namespace ovn
