#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ovn/data.hpp"

namespace ovn {

/// [1 - u]_+
inline double hinge(double u) { return std::max(0.0, 1.0 - u); }

/// Quadratic majorizer of the hinge loss anchored by z > 0:
/// g(u, z) = (1 - u + z)^2 / (4 z). Touches the hinge where z = |1 - u|.
inline double majorizer(double u, double z) {
  if (!(z > 0.0)) throw Error(ErrorKind::NonpositiveZ, "majorizer needs z > 0, got " + std::to_string(z));
  const double r = 1.0 - u + z;
  return r * r / (4.0 * z);
}

/// Minimizer of g(u, .) over z >= epsilon.
inline double z_update(double u, double epsilon) {
  const double gap = std::abs(1.0 - u);
  return gap >= epsilon ? gap : epsilon;
}

inline constexpr double kDefaultEpsilon = 1e-6;

/// Flattened list of the (class, pattern) pairs with labels(i, k) = 1,
/// ordered by class and then by pattern index.
struct PositivePairs {
  std::vector<Index> cls;
  std::vector<Index> pattern;
  std::vector<Index> class_offset;  // K + 1 entries; class k owns [offset[k], offset[k+1])

  Index size() const { return static_cast<Index>(cls.size()); }
  Index classes() const { return static_cast<Index>(class_offset.size()) - 1; }
  Index begin(Index k) const { return class_offset[static_cast<std::size_t>(k)]; }
  Index end(Index k) const { return class_offset[static_cast<std::size_t>(k) + 1]; }

  static PositivePairs from(const LabelMatrix& labels) {
    PositivePairs p;
    p.class_offset.push_back(0);
    for (Index k = 0; k < labels.cols(); ++k) {
      for (Index i = 0; i < labels.rows(); ++i) {
        if (labels(i, k) == 0) continue;
        p.cls.push_back(k);
        p.pattern.push_back(i);
      }
      p.class_offset.push_back(static_cast<Index>(p.cls.size()));
    }
    return p;
  }
};

/// Auxiliary variables of the MM iteration, one per positive pair.
struct MMState {
  Vector z;
  double epsilon = kDefaultEpsilon;
  std::vector<double> objective_trace;  // original hinge objective after each solve
  std::vector<double> majorized_trace;  // surrogate value at each solve

  static MMState initial(Index pairs, double epsilon) {
    MMState s;
    s.z = Vector::Ones(pairs);
    s.epsilon = epsilon;
    return s;
  }

  /// z <- max(|1 - u|, epsilon) for every pair, `margins` indexed like the pairs.
  void update(const Vector& margins) {
    for (Index p = 0; p < z.size(); ++p) z(p) = z_update(margins(p), epsilon);
  }
};

}  // namespace ovn
