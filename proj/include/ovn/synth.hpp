#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ovn/data.hpp"

namespace ovn {

enum class SynthKind { hourglass, moon, random_two_class, unseen_label_toy, symmetric_parallel };

inline std::string to_string(SynthKind k) {
  switch (k) {
    case SynthKind::hourglass: return "hourglass";
    case SynthKind::moon: return "moon";
    case SynthKind::random_two_class: return "random_two_class";
    case SynthKind::unseen_label_toy: return "unseen_label_toy";
    case SynthKind::symmetric_parallel: return "symmetric_parallel";
  }
  return "?";
}

inline SynthKind parse_synth_kind(const std::string& s) {
  for (SynthKind k : {SynthKind::hourglass, SynthKind::moon, SynthKind::random_two_class, SynthKind::unseen_label_toy,
                      SynthKind::symmetric_parallel})
    if (to_string(k) == s) return k;
  throw Error(ErrorKind::UnknownKind, "unknown synthetic dataset kind '" + s + "'");
}

struct SynthSpec {
  SynthKind kind = SynthKind::hourglass;
  int n_per_cluster = 10;
  double noise = 0.05;
  std::uint64_t seed = 0;
};

struct SynthDataset {
  Dataset train;
  std::optional<Dataset> test;
};

namespace synth {

// Label-set toy: class c1 on the right, an overlap blob {c1, c2} above it and
// no pattern carrying c2 alone. The novel region lies to the upper left.
struct Blob {
  double cx, cy, spread;
  std::array<int, 2> labels;
};
inline constexpr std::array<Blob, 2> kToyBlobs = {{
    {5.0, 0.0, 0.5, {1, 0}},
    {-1.0, 4.0, 0.5, {1, 1}},
}};

struct ToyTestPoint {
  double x, y;
  std::array<int, 2> labels;
};
inline constexpr std::array<ToyTestPoint, 6> kToyTest = {{
    {-4.0, 3.0, {0, 1}},
    {-5.0, 2.0, {0, 1}},
    {-3.0, 3.0, {0, 1}},
    {-2.0, 4.0, {1, 1}},
    {0.0, 3.0, {1, 0}},
    {1.0, 5.0, {1, 1}},
}};

class Builder {
 public:
  explicit Builder(Index classes) : k_(classes) {}

  void add(double x, double y, std::initializer_list<int> labels) {
    xs_.push_back({x, y});
    ls_.emplace_back(labels);
  }

  Dataset build(std::vector<std::string> class_names) const {
    Dataset ds;
    ds.features.resize(static_cast<Index>(xs_.size()), 2);
    ds.labels = LabelMatrix::Zero(static_cast<Index>(xs_.size()), k_);
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      ds.features(static_cast<Index>(i), 0) = xs_[i][0];
      ds.features(static_cast<Index>(i), 1) = xs_[i][1];
      for (Index k = 0; k < k_; ++k) ds.labels(static_cast<Index>(i), k) = ls_[i][static_cast<std::size_t>(k)];
    }
    ds.class_names = std::move(class_names);
    ds.feature_names = {"x1", "x2"};
    return ds;
  }

 private:
  Index k_;
  std::vector<std::array<double, 2>> xs_;
  std::vector<std::vector<int>> ls_;
};

inline SynthDataset hourglass(const SynthSpec& s, std::mt19937_64& rng) {
  // Four cones around the diagonals: left/right is class a, top/bottom class b.
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> angle(-pi / 4 + 0.2, pi / 4 - 0.2), radius(0.2, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  Builder b(2);
  for (int cone = 0; cone < 4; ++cone) {
    const double centre = cone * pi / 2;
    for (int i = 0; i < s.n_per_cluster; ++i) {
      const double t = centre + angle(rng), r = radius(rng);
      const double x = r * std::cos(t) + s.noise * jitter(rng), y = r * std::sin(t) + s.noise * jitter(rng);
      if (cone % 2 == 0) b.add(x, y, {1, 0});
      else b.add(x, y, {0, 1});
    }
  }
  return {b.build({"a", "b"}), std::nullopt};
}

inline SynthDataset moon(const SynthSpec& s, std::mt19937_64& rng) {
  constexpr double pi = std::numbers::pi;
  std::normal_distribution<double> jitter(0.0, 1.0);
  Builder b(2);
  const int n = s.n_per_cluster;
  for (int i = 0; i < n; ++i) {
    const double t = n > 1 ? pi * i / (n - 1) : pi / 2;
    b.add(std::cos(t) + s.noise * jitter(rng), std::sin(t) + s.noise * jitter(rng), {1, 0});
  }
  for (int i = 0; i < n; ++i) {
    const double t = n > 1 ? pi * i / (n - 1) : pi / 2;
    b.add(1.0 - std::cos(t) + s.noise * jitter(rng), 0.5 - std::sin(t) + s.noise * jitter(rng), {0, 1});
  }
  return {b.build({"upper", "lower"}), std::nullopt};
}

inline SynthDataset random_two_class(const SynthSpec& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double spread = 0.5 + s.noise;
  Builder b(2);
  for (int i = 0; i < s.n_per_cluster; ++i) b.add(1.0 + spread * g(rng), 1.0 + spread * g(rng), {1, 0});
  for (int i = 0; i < s.n_per_cluster; ++i) b.add(-1.0 + spread * g(rng), -1.0 + spread * g(rng), {0, 1});
  return {b.build({"pos", "neg"}), std::nullopt};
}

inline SynthDataset unseen_label_toy(const SynthSpec& s, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Builder train(2);
  for (const Blob& blob : kToyBlobs)
    for (int i = 0; i < s.n_per_cluster; ++i) {
      const double sd = blob.spread + s.noise;
      train.add(blob.cx + sd * g(rng), blob.cy + sd * g(rng), {blob.labels[0], blob.labels[1]});
    }
  Builder test(2);
  for (const ToyTestPoint& p : kToyTest) test.add(p.x, p.y, {p.labels[0], p.labels[1]});
  return {train.build({"c1", "c2"}), test.build({"c1", "c2"})};
}

inline SynthDataset symmetric_parallel(const SynthSpec& s, std::mt19937_64& rng) {
  // Class a sits at x1 > 0; class b is its exact mirror image across x1 = 0.
  // Each half is itself symmetric in x2 so the optimum has no x2 component.
  std::uniform_real_distribution<double> u1(0.5 + s.noise, 2.0 + s.noise), u2(0.0, 1.5);
  std::vector<std::array<double, 2>> half;
  for (int i = 0; i < s.n_per_cluster; ++i) {
    const double x = u1(rng), y = u2(rng);
    half.push_back({x, y});
    half.push_back({x, -y});
  }
  Builder b(2);
  for (const auto& p : half) b.add(p[0], p[1], {1, 0});
  for (const auto& p : half) b.add(-p[0], p[1], {0, 1});
  return {b.build({"a", "b"}), std::nullopt};
}

}  // namespace synth

/// Deterministic for a fixed spec, including the seed.
inline SynthDataset synth_generate(const SynthSpec& spec) {
  if (spec.n_per_cluster < 1) throw Error(ErrorKind::InvalidArgument, "n_per_cluster must be >= 1");
  if (!(spec.noise >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise must be >= 0");
  std::mt19937_64 rng(spec.seed);
  switch (spec.kind) {
    case SynthKind::hourglass: return synth::hourglass(spec, rng);
    case SynthKind::moon: return synth::moon(spec, rng);
    case SynthKind::random_two_class: return synth::random_two_class(spec, rng);
    case SynthKind::unseen_label_toy: return synth::unseen_label_toy(spec, rng);
    case SynthKind::symmetric_parallel: return synth::symmetric_parallel(spec, rng);
  }
  throw Error(ErrorKind::UnknownKind, "unknown synthetic dataset kind");
}

}  // namespace ovn
