#pragma once

// Small random problems shared by the unit and acceptance suites.

#include <random>

#include "ovn/data.hpp"

namespace oracle {

/// N patterns in M dimensions, one Gaussian blob per class. Every class gets
/// at least one member; with `multilabel` each pattern also joins a second
/// class with probability 0.3.
inline ovn::Dataset random_instance(std::mt19937_64& rng, ovn::Index N, ovn::Index M, ovn::Index K,
                                    bool multilabel = false, double spread = 1.0) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<ovn::Index> pick(0, K - 1);
  std::bernoulli_distribution extra(0.3);
  ovn::Matrix centers(K, M);
  for (ovn::Index i = 0; i < centers.size(); ++i) centers.data()[i] = 2.0 * g(rng);
  ovn::Dataset ds;
  ds.features.resize(N, M);
  ds.labels = ovn::LabelMatrix::Zero(N, K);
  for (ovn::Index i = 0; i < N; ++i) {
    const ovn::Index k = i < K ? i : pick(rng);
    ds.labels(i, k) = 1;
    if (multilabel && K > 1 && extra(rng)) ds.labels(i, (k + 1 + pick(rng) % (K - 1)) % K) = 1;
    for (ovn::Index j = 0; j < M; ++j) ds.features(i, j) = centers(k, j) + spread * g(rng);
  }
  for (ovn::Index k = 0; k < K; ++k) ds.class_names.push_back("c" + std::to_string(k));
  for (ovn::Index j = 0; j < M; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  return ds;
}

/// 1-D pair: x = +1 in the first class, x = -1 in the second.
inline ovn::Dataset two_points() {
  ovn::Dataset ds;
  ds.features.resize(2, 1);
  ds.features << 1.0, -1.0;
  ds.labels.resize(2, 2);
  ds.labels << 1, 0, 0, 1;
  ds.class_names = {"pos", "neg"};
  ds.feature_names = {"x"};
  return ds;
}

}  // namespace oracle
