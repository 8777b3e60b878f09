#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ovn/kernel_solver.hpp"
#include "ovn/linear_solver.hpp"
#include "ovn/model_selection.hpp"
#include "ovn/predict.hpp"

namespace ovn {

inline constexpr int kFormatVersion = 1;

/// A trained model plus what is needed to apply it to raw data.
struct SavedModel {
  std::variant<TrainedLinearModel, TrainedKernelModel> model;
  Task task = Task::multilabel;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  std::optional<FeatureScaling> scaling;

  bool is_kernel() const { return std::holds_alternative<TrainedKernelModel>(model); }
  const ConstraintMode& mode() const {
    return std::visit([](const auto& m) -> const ConstraintMode& { return m.mode; }, model);
  }
  const FitDiagnostics& diagnostics() const {
    return std::visit([](const auto& m) -> const FitDiagnostics& { return m.diagnostics; }, model);
  }

  /// Scores of raw (unscaled) feature rows.
  Matrix scores(const Matrix& raw) const {
    const Matrix x = scaling ? scaling->apply(raw) : raw;
    return std::visit([&](const auto& m) { return m.scores(x); }, model);
  }

  std::vector<LabelSet> predict(const Matrix& raw) const { return predict_label_sets(scores(raw), task); }
};

namespace io {

using nlohmann::json;

// NaN and infinities have no JSON literal; they are stored as null.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double get_num(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw Error(ErrorKind::ParseError, "expected a number, got " + std::string(j.type_name()));
  return j.get<double>();
}

inline json vec(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

inline json mat(const Matrix& m) {
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(vec(m.row(r).transpose()));
  return a;
}

inline Vector to_vec(const json& j, Index expected, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != expected)
    throw Error(ErrorKind::ParseError, std::string(what) + ": expected " + std::to_string(expected) + " values");
  Vector v(expected);
  for (Index i = 0; i < expected; ++i) v(i) = get_num(j[static_cast<std::size_t>(i)]);
  return v;
}

inline Matrix to_mat(const json& j, Index rows, Index cols, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    throw Error(ErrorKind::ParseError, std::string(what) + ": expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) m.row(r) = to_vec(j[static_cast<std::size_t>(r)], cols, what).transpose();
  return m;
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

inline json hyper(const Hyperparameters& hp) {
  return {{"alpha", num(hp.alpha)}, {"beta", num(hp.beta)},         {"gamma", num(hp.gamma)},
          {"epsilon", num(hp.epsilon)}, {"max_iters", hp.max_iters}, {"tol", num(hp.tol)}};
}

inline Hyperparameters hyper(const json& j) {
  Hyperparameters hp;
  hp.alpha = get_num(field(j, "alpha"));
  hp.beta = get_num(field(j, "beta"));
  hp.gamma = get_num(field(j, "gamma"));
  hp.epsilon = get_num(field(j, "epsilon"));
  hp.max_iters = get<int>(j, "max_iters");
  hp.tol = get_num(field(j, "tol"));
  return hp;
}

inline json kernel(const KernelSpec& k) {
  return {{"kind", to_string(k.kind)}, {"sigma", num(k.sigma)}, {"degree", k.degree}, {"coef0", num(k.coef0)}};
}

inline KernelSpec kernel(const json& j) {
  KernelSpec k;
  k.kind = parse_kernel_kind(get<std::string>(j, "kind"));
  k.sigma = get_num(field(j, "sigma"));
  k.degree = get<int>(j, "degree");
  k.coef0 = get_num(field(j, "coef0"));
  k.validate();
  return k;
}

inline json diagnostics(const FitDiagnostics& d) {
  return {{"iterations_used", d.iterations_used},
          {"final_objective", num(d.final_objective)},
          {"kkt_residual", num(d.kkt_residual)},
          {"converged", d.converged}};
}

inline FitDiagnostics diagnostics(const json& j) {
  FitDiagnostics d;
  d.iterations_used = get<int>(j, "iterations_used");
  d.final_objective = get_num(field(j, "final_objective"));
  d.kkt_residual = get_num(field(j, "kkt_residual"));
  d.converged = get<bool>(j, "converged");
  return d;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline constexpr double kFeasibilityTolerance = 1e-8;

}  // namespace io

/// JSON document for a model. Doubles are written in shortest round-trip
/// form, so loading reproduces every coefficient bit for bit.
inline nlohmann::json model_to_json(const SavedModel& s) {
  using nlohmann::json;
  json j;
  j["format_version"] = kFormatVersion;
  j["task"] = to_string(s.task);
  j["class_names"] = s.class_names;
  j["feature_names"] = s.feature_names;
  j["feature_scaling"] = s.scaling ? json{{"offset", io::vec(s.scaling->offset)}, {"scale", io::vec(s.scaling->scale)}}
                                   : json(nullptr);
  std::visit(
      [&](const auto& m) {
        j["mode"] = m.mode.name();
        j["hyperparameters"] = io::hyper(m.hp);
        j["diagnostics"] = io::diagnostics(m.diagnostics);
        j["b"] = io::vec(m.b);
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, TrainedLinearModel>) {
          j["model_kind"] = "linear";
          j["K"] = m.W.rows();
          j["M"] = m.W.cols();
          j["W"] = io::mat(m.W);
        } else {
          j["model_kind"] = "kernel";
          j["K"] = m.A.rows();
          j["M"] = m.train_features.cols();
          j["N"] = m.A.cols();
          j["kernel"] = io::kernel(m.kernel);
          j["ridge"] = io::num(m.ridge);
          j["A"] = io::mat(m.A);
          j["train_features"] = io::mat(m.train_features);
        }
      },
      s.model);
  return j;
}

inline SavedModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "model document must be an object");
  const int version = io::get<int>(j, "format_version");
  if (version != kFormatVersion)
    throw Error(ErrorKind::UnsupportedVersion, "format_version " + std::to_string(version) + " is not supported (expected " +
                                                   std::to_string(kFormatVersion) + ")");
  SavedModel s;
  const std::string kind = io::get<std::string>(j, "model_kind");
  s.task = parse_task(io::get<std::string>(j, "task"));
  const Index K = io::get<Index>(j, "K"), M = io::get<Index>(j, "M");
  if (K < 1 || M < 0) throw Error(ErrorKind::ParseError, "bad model dimensions");
  s.class_names = io::get<std::vector<std::string>>(j, "class_names");
  s.feature_names = io::get<std::vector<std::string>>(j, "feature_names");
  if (static_cast<Index>(s.class_names.size()) != K || static_cast<Index>(s.feature_names.size()) != M)
    throw Error(ErrorKind::InvariantViolation, "name lists do not match K and M");
  const auto& fs = io::field(j, "feature_scaling");
  if (!fs.is_null())
    s.scaling = FeatureScaling{io::to_vec(io::field(fs, "offset"), M, "offset"),
                               io::to_vec(io::field(fs, "scale"), M, "scale")};

  const ConstraintMode mode = ConstraintMode::parse(io::get<std::string>(j, "mode"));
  const Hyperparameters hp = io::hyper(io::field(j, "hyperparameters"));
  const FitDiagnostics diag = io::diagnostics(io::field(j, "diagnostics"));
  const Vector b = io::to_vec(io::field(j, "b"), K, "b");
  double violation = 0.0;
  if (kind == "linear") {
    TrainedLinearModel m{io::to_mat(io::field(j, "W"), K, M, "W"), b, mode, hp, diag};
    violation = constraint_violation(m.W, m.b, mode);
    s.model = std::move(m);
  } else if (kind == "kernel") {
    const Index N = io::get<Index>(j, "N");
    if (N < 1) throw Error(ErrorKind::ParseError, "bad training set size");
    TrainedKernelModel m{io::to_mat(io::field(j, "A"), K, N, "A"),
                         b,
                         io::kernel(io::field(j, "kernel")),
                         io::to_mat(io::field(j, "train_features"), N, M, "train_features"),
                         mode,
                         hp,
                         io::get_num(io::field(j, "ridge")),
                         diag};
    violation = constraint_violation(m);
    s.model = std::move(m);
  } else {
    throw Error(ErrorKind::ParseError, "unknown model_kind '" + kind + "'");
  }
  if (!(violation <= io::kFeasibilityTolerance)) {
    std::ostringstream o;
    o << "stored " << mode.name() << " model violates its hard constraints by " << violation;
    throw Error(ErrorKind::InvariantViolation, o.str());
  }
  return s;
}

inline void save_model(const SavedModel& s, const std::string& path) {
  io::write_text(path, model_to_json(s).dump(1) + "\n");
}

inline SavedModel load_model(const std::string& path) {
  const std::string text = io::read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, "'" + path + "': " + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Grids and CV reports

/// Reads a grid document. Every key is optional and falls back to the
/// defaults: alphas, betas, gammas, sigmas, degrees, coef0, kernel, modes,
/// seed, n_folds, epsilon, tol, max_iters.
inline GridSpec grid_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "grid document must be an object");
  GridSpec g;
  try {
    if (j.contains("alphas")) g.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("thetas")) g.alphas = j.at("thetas").get<std::vector<double>>();
    if (j.contains("betas")) g.betas = j.at("betas").get<std::vector<double>>();
    if (j.contains("gammas")) g.gammas = j.at("gammas").get<std::vector<double>>();
    if (j.contains("sigmas")) g.sigmas = j.at("sigmas").get<std::vector<double>>();
    if (j.contains("degrees")) g.degrees = j.at("degrees").get<std::vector<int>>();
    if (j.contains("coef0")) g.coef0 = j.at("coef0").get<double>();
    if (j.contains("kernel")) g.kernel = parse_kernel_kind(j.at("kernel").get<std::string>());
    if (j.contains("modes")) {
      g.modes.clear();
      for (const auto& m : j.at("modes")) g.modes.push_back(ConstraintMode::parse(m.get<std::string>()));
    }
    if (j.contains("seed")) g.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("n_folds")) g.n_folds = j.at("n_folds").get<int>();
    if (j.contains("epsilon")) g.base.epsilon = j.at("epsilon").get<double>();
    if (j.contains("tol")) g.base.tol = j.at("tol").get<double>();
    if (j.contains("max_iters")) g.base.max_iters = j.at("max_iters").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("grid: ") + e.what());
  }
  g.validate();
  return g;
}

inline GridSpec load_grid(const std::string& path) {
  try {
    return grid_from_json(nlohmann::json::parse(io::read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, "'" + path + "': " + e.what());
  }
}

inline nlohmann::json metrics_to_json(const MetricsReport& m) {
  return {{"accuracy", m.accuracy},   {"hamming_loss", m.hamming_loss}, {"exact_match", m.exact_match},
          {"precision", m.precision}, {"recall", m.recall},             {"f1", m.f1},
          {"n_instances", m.n_instances}};
}

inline nlohmann::json cv_report_to_json(const CVReport& r) {
  using nlohmann::json;
  json tuples = json::array();
  for (const auto& t : r.tuples) {
    json folds = json::array();
    for (const auto& f : t.folds) folds.push_back(metrics_to_json(f));
    tuples.push_back({{"tuple", t.tuple.describe(r.solver)},
                      {"mode", t.tuple.mode.name()},
                      {"hyperparameters", io::hyper(t.tuple.hp)},
                      {"kernel", io::kernel(t.tuple.kernel)},
                      {"infeasible", t.infeasible},
                      {"reason", t.reason},
                      {"folds", folds},
                      {"mean_accuracy", io::num(t.mean_accuracy)},
                      {"mean_hamming", io::num(t.mean_hamming)}});
  }
  return {{"format_version", kFormatVersion},
          {"task", to_string(r.task)},
          {"solver", to_string(r.solver)},
          {"one_vs_rest", r.one_vs_rest},
          {"n_folds", r.n_folds},
          {"seed", r.seed},
          {"best_index", r.best_index},
          {"best_tuple", r.best_tuple.describe(r.solver)},
          {"best_mean_accuracy", io::num(r.best_mean_accuracy)},
          {"best_mean_hamming", io::num(r.best_mean_hamming)},
          {"tuples", tuples}};
}

inline void save_cv_report(const CVReport& r, const std::string& path) {
  io::write_text(path, cv_report_to_json(r).dump(1) + "\n");
}

}  // namespace ovn
