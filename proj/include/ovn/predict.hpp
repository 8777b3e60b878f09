#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ovn/data.hpp"

namespace ovn {

/// Threshold of the label-set rule: every class with projection >= 1.
inline constexpr double kLabelThreshold = 1.0;

/// Winner-take-all; the lowest index wins exact ties.
inline int predict_multiclass(const Eigen::Ref<const Vector>& scores) {
  if (scores.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty score vector");
  int best = 0;
  for (Index k = 1; k < scores.size(); ++k)
    if (scores(k) > scores(best)) best = static_cast<int>(k);
  return best;
}

/// {k : scores[k] >= 1}, falling back to the arg-max class when that is empty.
inline LabelSet predict_multilabel(const Eigen::Ref<const Vector>& scores, double threshold = kLabelThreshold) {
  LabelSet out;
  for (Index k = 0; k < scores.size(); ++k)
    if (scores(k) >= threshold) out.push_back(static_cast<int>(k));
  if (out.empty()) out.push_back(predict_multiclass(scores));
  return out;
}

enum class Task { multiclass, multilabel };

inline Task parse_task(const std::string& s) {
  if (s == "multiclass") return Task::multiclass;
  if (s == "multilabel") return Task::multilabel;
  throw Error(ErrorKind::UnknownKind, "unknown task '" + s + "'");
}

inline std::string to_string(Task t) { return t == Task::multiclass ? "multiclass" : "multilabel"; }

/// Label sets for every row of an N x K score matrix.
inline std::vector<LabelSet> predict_label_sets(const Matrix& scores, Task task) {
  std::vector<LabelSet> out;
  out.reserve(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) {
    const Vector row = scores.row(i).transpose();
    if (task == Task::multiclass) out.push_back({predict_multiclass(row)});
    else out.push_back(predict_multilabel(row));
  }
  return out;
}

/// "0110"-style indicator string of a label set.
inline std::string to_bitstring(const LabelSet& s, Index classes) {
  std::string out(static_cast<std::size_t>(classes), '0');
  for (int k : s) out[static_cast<std::size_t>(k)] = '1';
  return out;
}

inline LabelSet from_bitstring(const std::string& bits) {
  LabelSet out;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] == '1') out.push_back(static_cast<int>(k));
    else if (bits[k] != '0') throw Error(ErrorKind::MalformedCsv, "label bitstring '" + bits + "' is not binary");
  }
  return out;
}

/// Instance-averaged multilabel metrics.
struct MetricsReport {
  double accuracy = 0.0;      // |P n Y| / |P u Y|
  double hamming_loss = 0.0;  // |P xor Y| / K
  double exact_match = 0.0;   // P == Y
  double precision = 0.0;     // |P n Y| / |P|
  double recall = 0.0;        // |P n Y| / |Y|
  double f1 = 0.0;            // harmonic mean of averaged precision and recall
  Index n_instances = 0;
};

namespace detail {

inline double ratio_or_one(double num, double den) { return den == 0.0 ? 1.0 : num / den; }

inline LabelSet normalized(LabelSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace detail

/// 0/0 counts as 1 for accuracy, precision and recall, so empty predictions
/// against empty truths score perfectly.
inline MetricsReport evaluate(const std::vector<LabelSet>& predictions, const std::vector<LabelSet>& truths,
                              Index classes) {
  if (predictions.size() != truths.size())
    throw Error(ErrorKind::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                               std::to_string(truths.size()) + " truths");
  if (classes < 1) throw Error(ErrorKind::InvalidArgument, "need at least one class");
  MetricsReport r;
  r.n_instances = static_cast<Index>(predictions.size());
  if (predictions.empty()) return r;

  for (std::size_t n = 0; n < predictions.size(); ++n) {
    const LabelSet p = detail::normalized(predictions[n]);
    const LabelSet y = detail::normalized(truths[n]);
    for (const LabelSet* s : {&p, &y})
      for (int k : *s)
        if (k < 0 || k >= classes)
          throw Error(ErrorKind::InvalidArgument, "label index " + std::to_string(k) + " out of range");
    LabelSet inter, uni;
    std::set_intersection(p.begin(), p.end(), y.begin(), y.end(), std::back_inserter(inter));
    std::set_union(p.begin(), p.end(), y.begin(), y.end(), std::back_inserter(uni));
    const double ni = static_cast<double>(inter.size());
    r.accuracy += detail::ratio_or_one(ni, static_cast<double>(uni.size()));
    r.hamming_loss += static_cast<double>(uni.size() - inter.size()) / static_cast<double>(classes);
    r.exact_match += p == y ? 1.0 : 0.0;
    r.precision += detail::ratio_or_one(ni, static_cast<double>(p.size()));
    r.recall += detail::ratio_or_one(ni, static_cast<double>(y.size()));
  }
  const double n = static_cast<double>(predictions.size());
  r.accuracy /= n;
  r.hamming_loss /= n;
  r.exact_match /= n;
  r.precision /= n;
  r.recall /= n;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace ovn
