#pragma once

#include <cmath>
#include <string>

#include "ovn/data.hpp"

namespace ovn {

enum class KernelKind { linear, gaussian, polynomial };

inline std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::linear: return "linear";
    case KernelKind::gaussian: return "gaussian";
    case KernelKind::polynomial: return "poly";
  }
  return "?";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "linear") return KernelKind::linear;
  if (s == "gaussian" || s == "rbf") return KernelKind::gaussian;
  if (s == "poly" || s == "polynomial") return KernelKind::polynomial;
  throw Error(ErrorKind::UnknownKind, "unknown kernel '" + s + "'");
}

struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  double sigma = 1.0;  // gaussian width
  int degree = 2;      // polynomial
  double coef0 = 1.0;  // polynomial offset

  void validate() const {
    if (kind == KernelKind::gaussian && !(sigma > 0.0))
      throw Error(ErrorKind::InvalidArgument, "gaussian kernel needs sigma > 0");
    if (kind == KernelKind::polynomial && degree < 1)
      throw Error(ErrorKind::InvalidArgument, "polynomial kernel needs degree >= 1");
  }

  static KernelSpec linear() { return {KernelKind::linear, 1.0, 1, 0.0}; }
  static KernelSpec gaussian(double sigma) { return {KernelKind::gaussian, sigma, 2, 1.0}; }
  static KernelSpec polynomial(int degree, double coef0 = 1.0) {
    return {KernelKind::polynomial, 1.0, degree, coef0};
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// kappa(x, y). Gaussian: exp(-|x-y|^2 / (2 sigma^2)).
inline double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                          const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::DimensionMismatch,
                "kernel arguments have lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  switch (spec.kind) {
    case KernelKind::linear:
      return x.dot(y);
    case KernelKind::gaussian:
      return std::exp(-(x - y).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
    case KernelKind::polynomial:
      return std::pow(x.dot(y) + spec.coef0, spec.degree);
  }
  return 0.0;
}

struct GramMatrix {
  Matrix values;
  double ridge = 0.0;
};

inline constexpr double kDefaultGramRidge = 1e-10;

namespace detail {

// Row-major pair evaluation without the Ref conversions of kernel_eval.
inline double kernel_rows(const KernelSpec& spec, const Matrix& a, Index i, const Matrix& b, Index j) {
  switch (spec.kind) {
    case KernelKind::linear:
      return a.row(i).dot(b.row(j));
    case KernelKind::gaussian:
      return std::exp(-(a.row(i) - b.row(j)).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
    case KernelKind::polynomial:
      return std::pow(a.row(i).dot(b.row(j)) + spec.coef0, spec.degree);
  }
  return 0.0;
}

}  // namespace detail

/// Training Gram matrix. The upper triangle is computed and mirrored, so the
/// result is exactly symmetric; `ridge` is added to the diagonal.
inline GramMatrix gram(const KernelSpec& spec, const Matrix& x, double ridge = kDefaultGramRidge) {
  spec.validate();
  if (ridge < 0.0) throw Error(ErrorKind::InvalidArgument, "ridge must be >= 0");
  const Index n = x.rows();
  GramMatrix g{Matrix(n, n), ridge};
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double v = detail::kernel_rows(spec, x, i, x, j);
      g.values(i, j) = v;
      g.values(j, i) = v;
    }
    g.values(i, i) += ridge;
  }
  return g;
}

/// N x T matrix with entry (i, t) = kappa(train_i, test_t).
inline Matrix gram_cross(const KernelSpec& spec, const Matrix& train, const Matrix& test) {
  spec.validate();
  if (train.cols() != test.cols())
    throw Error(ErrorKind::DimensionMismatch, "train has " + std::to_string(train.cols()) + " features, test has " +
                                                  std::to_string(test.cols()));
  Matrix out(train.rows(), test.rows());
  for (Index t = 0; t < test.rows(); ++t)
    for (Index i = 0; i < train.rows(); ++i) out(i, t) = detail::kernel_rows(spec, train, i, test, t);
  return out;
}

}  // namespace ovn
