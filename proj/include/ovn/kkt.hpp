#pragma once

#include <cmath>
#include <string>

#include "ovn/data.hpp"

namespace ovn {

/// Quadratic subproblem of one MM step:
///   minimize x^T H x - rhs^T x   subject to   constraints^T x = 0.
/// The first-order conditions are the block system
///   [ 2H  C ] [x     ]   [rhs]
///   [ C^T 0 ] [lambda] = [ 0 ].
struct AssembledSystem {
  Matrix H;
  Vector rhs;
  Matrix constraints;  // L x c, c may be 0
};

struct KktSolution {
  Vector x;
  Vector multipliers;
  double residual = 0.0;  // |block residual| / max(1, |rhs|)
};

namespace detail {

// Cholesky that also rejects pivots which are positive only through rounding.
template <class Mat>
bool robust_llt(const Mat& a, Eigen::LLT<Matrix>& llt) {
  llt.compute(a);
  if (llt.info() != Eigen::Success) return false;
  const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  const auto d = llt.matrixLLT().diagonal();
  for (Index i = 0; i < d.size(); ++i)
    if (!(d(i) * d(i) > 1e-14 * scale)) return false;
  return true;
}

inline double kkt_residual(const AssembledSystem& s, const Vector& x, const Vector& lambda) {
  Vector r = 2.0 * (s.H * x) - s.rhs;
  if (s.constraints.cols() > 0) r += s.constraints * lambda;
  double sq = r.squaredNorm();
  if (s.constraints.cols() > 0) sq += (s.constraints.transpose() * x).squaredNorm();
  return std::sqrt(sq) / std::max(1.0, s.rhs.norm());
}

}  // namespace detail

/// Solves the block first-order system. When 2H is positive definite the
/// multipliers come from the Schur complement C^T (2H)^{-1} C; otherwise the
/// problem is reduced to the null space of C^T, where the Hessian must be
/// positive definite for a unique minimizer.
inline KktSolution solve_kkt(const AssembledSystem& s) {
  const Index n = s.H.rows();
  const Index c = s.constraints.cols();
  if (s.H.cols() != n || s.rhs.size() != n || (c > 0 && s.constraints.rows() != n))
    throw Error(ErrorKind::DimensionMismatch, "inconsistent KKT block sizes");

  KktSolution out;
  Eigen::LLT<Matrix> llt;
  const Matrix h2 = 2.0 * s.H;
  if (detail::robust_llt(h2, llt)) {
    if (c == 0) {
      out.x = llt.solve(s.rhs);
      out.multipliers.resize(0);
    } else {
      const Matrix y = llt.solve(s.constraints);
      const Vector x0 = llt.solve(s.rhs);
      const Matrix schur = s.constraints.transpose() * y;
      Eigen::LLT<Matrix> schur_llt;
      if (!detail::robust_llt(schur, schur_llt))
        throw Error(ErrorKind::SingularSystem, "constraint rows are linearly dependent");
      out.multipliers = schur_llt.solve(s.constraints.transpose() * x0);
      out.x = x0 - y * out.multipliers;
    }
  } else {
    if (c == 0) throw Error(ErrorKind::HessianNotPD, "Hessian failed Cholesky factorization");
    Eigen::HouseholderQR<Matrix> qr(s.constraints);
    const Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
    for (Index i = 0; i < c; ++i)
      if (std::abs(r(i, i)) < 1e-12) throw Error(ErrorKind::SingularSystem, "constraint rows are linearly dependent");
    const Matrix range = q.leftCols(c);
    const Matrix null = q.rightCols(n - c);
    const Matrix reduced = null.transpose() * h2 * null;
    Eigen::LLT<Matrix> reduced_llt;
    if (!detail::robust_llt(reduced, reduced_llt))
      throw Error(ErrorKind::HessianNotPD, "Hessian is not positive definite on the constraint null space");
    out.x = null * reduced_llt.solve(null.transpose() * s.rhs);
    // C = range * R, so C lambda = range * (R lambda).
    const Vector g = range.transpose() * (s.rhs - h2 * out.x);
    out.multipliers = r.triangularView<Eigen::Upper>().solve(g);
  }
  out.residual = detail::kkt_residual(s, out.x, out.multipliers);
  return out;
}

}  // namespace ovn
