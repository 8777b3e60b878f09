#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ovn/error.hpp"

namespace ovn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using LabelMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

/// Sorted, duplicate-free class indices of one instance.
using LabelSet = std::vector<int>;

/// N patterns with M features each and a binary N x K label matrix.
struct Dataset {
  Matrix features;
  LabelMatrix labels;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;

  Index n() const { return features.rows(); }
  Index m() const { return features.cols(); }
  Index k() const { return labels.cols(); }

  LabelSet label_set(Index i) const {
    LabelSet out;
    for (Index c = 0; c < labels.cols(); ++c)
      if (labels(i, c) != 0) out.push_back(static_cast<int>(c));
    return out;
  }

  std::vector<LabelSet> label_sets() const {
    std::vector<LabelSet> out;
    out.reserve(static_cast<std::size_t>(n()));
    for (Index i = 0; i < n(); ++i) out.push_back(label_set(i));
    return out;
  }

  /// C_k for every class: indices of the patterns carrying label k.
  std::vector<std::vector<Index>> class_members() const {
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(k()));
    for (Index i = 0; i < n(); ++i)
      for (Index c = 0; c < k(); ++c)
        if (labels(i, c) != 0) out[static_cast<std::size_t>(c)].push_back(i);
    return out;
  }

  /// Rows selected by `rows`, in that order.
  Dataset subset(const std::vector<Index>& rows) const {
    Dataset out;
    out.features.resize(static_cast<Index>(rows.size()), m());
    out.labels.resize(static_cast<Index>(rows.size()), k());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.features.row(static_cast<Index>(r)) = features.row(rows[r]);
      out.labels.row(static_cast<Index>(r)) = labels.row(rows[r]);
    }
    out.class_names = class_names;
    out.feature_names = feature_names;
    return out;
  }

  /// Shape and 0/1 checks. Training additionally requires every row to carry a
  /// label and every class to own at least one pattern.
  void validate(bool training) const {
    if (labels.rows() != features.rows())
      throw Error(ErrorKind::DimensionMismatch, "features have " + std::to_string(features.rows()) +
                                                    " rows but labels have " + std::to_string(labels.rows()));
    if (static_cast<Index>(class_names.size()) != k() || static_cast<Index>(feature_names.size()) != m())
      throw Error(ErrorKind::DimensionMismatch, "name lists do not match matrix shapes");
    for (Index i = 0; i < labels.rows(); ++i)
      for (Index c = 0; c < labels.cols(); ++c)
        if (labels(i, c) != 0 && labels(i, c) != 1)
          throw Error(ErrorKind::InvariantViolation, "label entries must be 0 or 1");
    if (!training) return;
    if (k() == 0) throw Error(ErrorKind::NoLabels, "dataset has no classes");
    for (Index i = 0; i < n(); ++i)
      if (labels.row(i).sum() == 0)
        throw Error(ErrorKind::EmptyLabelRow, "row " + std::to_string(i + 1) + " has no label");
    for (Index c = 0; c < k(); ++c)
      if (labels.col(c).sum() == 0)
        throw Error(ErrorKind::EmptyClass, "class '" + class_names[static_cast<std::size_t>(c)] +
                                               "' has no training patterns");
  }
};

/// A pattern with a trailing constant 1 so that w~^T x~ = w^T x + b.
struct AugmentedPattern {
  Vector values;
};

inline AugmentedPattern augment(const Eigen::Ref<const Vector>& x) {
  AugmentedPattern out{Vector(x.size() + 1)};
  out.values.head(x.size()) = x;
  out.values(x.size()) = 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// CSV

struct CsvOptions {
  std::string label_prefix = "label:";
  std::optional<std::string> multiclass_column;
  /// Permit files without label columns (prediction inputs).
  bool allow_unlabeled = false;
  /// Permit rows whose labels are all zero (evaluation of external data).
  bool allow_empty_label_rows = false;
};

namespace detail {

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// %.17g: enough digits for any double to survive a text round trip.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses the CSV dialect used throughout: a header row, numeric feature
/// columns, and either 0/1 columns named `<prefix><class>` or one categorical
/// column expanded one-hot with lexicographically sorted classes.
inline Dataset parse_csv(std::istream& in, const CsvOptions& opt = {}) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::MalformedCsv, "missing header row");
  const auto header = detail::split_csv_line(detail::trim(line));

  std::vector<std::size_t> feature_cols, label_cols;
  std::optional<std::size_t> category_col;
  Dataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (opt.multiclass_column && name == *opt.multiclass_column) {
      category_col = c;
    } else if (!opt.label_prefix.empty() && name.rfind(opt.label_prefix, 0) == 0) {
      label_cols.push_back(c);
      ds.class_names.push_back(name.substr(opt.label_prefix.size()));
    } else {
      feature_cols.push_back(c);
      ds.feature_names.push_back(name);
    }
  }
  if (opt.multiclass_column && !category_col)
    throw Error(ErrorKind::NoLabels, "column '" + *opt.multiclass_column + "' not found");
  if (category_col) {
    ds.class_names.clear();
    feature_cols.insert(feature_cols.end(), label_cols.begin(), label_cols.end());
    std::sort(feature_cols.begin(), feature_cols.end());
    label_cols.clear();
    ds.feature_names.clear();
    for (std::size_t c : feature_cols) ds.feature_names.push_back(header[c]);
  }
  if (!category_col && label_cols.empty() && !opt.allow_unlabeled)
    throw Error(ErrorKind::NoLabels, "no column starts with '" + opt.label_prefix + "'");

  std::vector<std::vector<double>> feature_rows;
  std::vector<std::vector<int>> label_rows;
  std::vector<std::string> categories;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty()) continue;
    ++row;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorKind::MalformedCsv, "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                               " cells, header has " + std::to_string(header.size()));
    std::vector<double> f;
    f.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      auto v = detail::parse_double(cells[c]);
      if (!v)
        throw Error(ErrorKind::MalformedCsv,
                    "row " + std::to_string(row) + ", column " + header[c] + ": '" + cells[c] + "' is not numeric");
      f.push_back(*v);
    }
    std::vector<int> l;
    for (std::size_t c : label_cols) {
      if (cells[c] == "1" || cells[c] == "1.0") l.push_back(1);
      else if (cells[c] == "0" || cells[c] == "0.0") l.push_back(0);
      else
        throw Error(ErrorKind::MalformedCsv,
                    "row " + std::to_string(row) + ", column " + header[c] + ": label must be 0 or 1");
    }
    if (category_col) categories.push_back(cells[*category_col]);
    feature_rows.push_back(std::move(f));
    label_rows.push_back(std::move(l));
  }

  const auto n = static_cast<Index>(feature_rows.size());
  ds.features.resize(n, static_cast<Index>(feature_cols.size()));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < ds.features.cols(); ++j)
      ds.features(i, j) = feature_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

  if (category_col) {
    std::set<std::string> sorted(categories.begin(), categories.end());
    ds.class_names.assign(sorted.begin(), sorted.end());
    std::map<std::string, Index> index_of;
    for (std::size_t c = 0; c < ds.class_names.size(); ++c) index_of[ds.class_names[c]] = static_cast<Index>(c);
    ds.labels = LabelMatrix::Zero(n, static_cast<Index>(ds.class_names.size()));
    for (Index i = 0; i < n; ++i) ds.labels(i, index_of[categories[static_cast<std::size_t>(i)]]) = 1;
  } else {
    ds.labels.resize(n, static_cast<Index>(label_cols.size()));
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < ds.labels.cols(); ++c)
        ds.labels(i, c) = label_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    if (!opt.allow_empty_label_rows && ds.k() > 0)
      for (Index i = 0; i < n; ++i)
        if (ds.labels.row(i).sum() == 0)
          throw Error(ErrorKind::EmptyLabelRow, "row " + std::to_string(i + 1) + " has no label");
  }
  return ds;
}

inline Dataset load_csv(const std::string& path, const CsvOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  return parse_csv(in, opt);
}

inline void write_csv(const Dataset& ds, std::ostream& out, const std::string& label_prefix = "label:") {
  bool first = true;
  auto sep = [&] {
    if (!first) out << ',';
    first = false;
  };
  for (const auto& name : ds.feature_names) sep(), out << name;
  for (const auto& name : ds.class_names) sep(), out << label_prefix << name;
  out << '\n';
  for (Index i = 0; i < ds.n(); ++i) {
    first = true;
    for (Index j = 0; j < ds.m(); ++j) sep(), out << detail::format_double(ds.features(i, j));
    for (Index c = 0; c < ds.k(); ++c) sep(), out << ds.labels(i, c);
    out << '\n';
  }
}

inline void write_csv(const Dataset& ds, const std::string& path, const std::string& label_prefix = "label:") {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  write_csv(ds, out, label_prefix);
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Normalization

/// Per-feature affine map x -> (x - offset) * scale.
struct FeatureScaling {
  Vector offset;
  Vector scale;

  Matrix apply(const Matrix& x) const {
    if (x.cols() != offset.size())
      throw Error(ErrorKind::DimensionMismatch, "scaling expects " + std::to_string(offset.size()) + " features");
    return (x.rowwise() - offset.transpose()).array().rowwise() * scale.transpose().array();
  }
};

/// Min-max to [0,1]; constant features map to 0.
inline FeatureScaling fit_minmax(const Matrix& x) {
  FeatureScaling s{Vector::Zero(x.cols()), Vector::Ones(x.cols())};
  if (x.rows() == 0) return s;
  for (Index j = 0; j < x.cols(); ++j) {
    const double lo = x.col(j).minCoeff();
    const double hi = x.col(j).maxCoeff();
    s.offset(j) = lo;
    s.scale(j) = hi > lo ? 1.0 / (hi - lo) : 1.0;
  }
  return s;
}

inline FeatureScaling normalize_minmax(Dataset& ds) {
  auto s = fit_minmax(ds.features);
  ds.features = s.apply(ds.features);
  return s;
}

}  // namespace ovn
