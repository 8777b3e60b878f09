#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ovn/ovn.hpp"
#include "reproduce.hpp"

#ifndef OVN_DATA_DIR
#define OVN_DATA_DIR "data"
#endif

namespace {

using namespace ovn;

enum Exit { kOk = 0, kBands = 1, kUsage = 2, kData = 3, kSolver = 4 };

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnknownKind:
      return kUsage;
    case ErrorKind::HessianNotPD:
    case ErrorKind::SingularSystem:
    case ErrorKind::AllTuplesInfeasible:
    case ErrorKind::NonpositiveZ:
      return kSolver;
    default:
      return kData;
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string kind, out, test_out;
  std::uint64_t seed = 0;
  int n_per_cluster = 10;
  double noise = 0.05;
};

int run_synth(const SynthArgs& a) {
  const SynthDataset d = synth_generate({parse_synth_kind(a.kind), a.n_per_cluster, a.noise, a.seed});
  write_csv(d.train, a.out);
  if (d.test) {
    std::string test = a.test_out;
    if (test.empty()) {
      std::filesystem::path p(a.out);
      test = (p.parent_path() / (p.stem().string() + ".test" + p.extension().string())).string();
    }
    write_csv(*d.test, test);
  }
  return kOk;
}

struct TrainArgs {
  std::string data, task = "multilabel", solver = "linear", mode = "sw-hb", kernel = "gaussian", model_out;
  std::string label_prefix = "label:", class_column;
  double alpha = 0.5, beta = 1.0, gamma = 1.0, sigma = 1.0, coef0 = 1.0, epsilon = kDefaultEpsilon, tol = 1e-8;
  double ridge = kDefaultGramRidge;
  int degree = 2, max_iters = 500;
  bool normalize = false;
};

CsvOptions csv_options(const std::string& prefix, const std::string& class_column) {
  CsvOptions o;
  o.label_prefix = prefix;
  if (!class_column.empty()) o.multiclass_column = class_column;
  return o;
}

int run_train(const TrainArgs& a) {
  Dataset ds = load_csv(a.data, csv_options(a.label_prefix, a.class_column));
  const Task task = parse_task(a.task);
  const SolverKind solver = parse_solver_kind(a.solver);
  const ConstraintMode mode = ConstraintMode::parse(a.mode);
  Hyperparameters hp;
  hp.alpha = a.alpha;
  hp.beta = a.beta;
  hp.gamma = a.gamma;
  hp.epsilon = a.epsilon;
  hp.tol = a.tol;
  hp.max_iters = a.max_iters;

  SavedModel saved{TrainedLinearModel{}, task, ds.class_names, ds.feature_names, std::nullopt};
  if (a.normalize) saved.scaling = normalize_minmax(ds);
  if (solver == SolverKind::linear) {
    saved.model = fit_linear(ds, mode, hp);
  } else {
    KernelSpec k;
    k.kind = parse_kernel_kind(a.kernel);
    k.sigma = a.sigma;
    k.degree = a.degree;
    k.coef0 = a.coef0;
    KernelFitOptions opt;
    opt.ridge = a.ridge;
    saved.model = fit_kernel(ds, k, mode, hp, opt);
  }
  save_model(saved, a.model_out);
  const auto& d = saved.diagnostics();
  std::cout << "trained " << (saved.is_kernel() ? "kernel" : "linear") << " " << mode.name() << " model: K=" << ds.k()
            << " N=" << ds.n() << " iterations=" << d.iterations_used << " objective=" << num(d.final_objective)
            << " converged=" << (d.converged ? "yes" : "no") << "\n";
  if (!d.converged) std::cerr << "warning: MaxItersExceeded: returned the best iterate\n";
  return kOk;
}

struct PredictArgs {
  std::string model, data, out, boundary, label_prefix = "label:", class_column;
  int grid_steps = 100;
};

// Features only: label columns, if present, are ignored.
Matrix load_features(const std::string& path, const std::string& prefix, const std::string& class_column) {
  CsvOptions o = csv_options(prefix, class_column);
  o.allow_unlabeled = true;
  o.allow_empty_label_rows = true;
  return load_csv(path, o).features;
}

void dump_boundary(const SavedModel& m, const Matrix& x, int steps, const std::string& path) {
  if (x.cols() != 2) throw Error(ErrorKind::DimensionMismatch, "--dump-boundary needs two features");
  if (steps < 2) throw Error(ErrorKind::InvalidArgument, "--grid-steps must be >= 2");
  const Vector lo = x.colwise().minCoeff().transpose(), hi = x.colwise().maxCoeff().transpose();
  const Vector pad = 0.1 * (hi - lo).cwiseMax(1e-12);
  Matrix g(static_cast<Index>(steps) * steps, 2);
  for (int i = 0; i < steps; ++i)
    for (int j = 0; j < steps; ++j) {
      const double tx = static_cast<double>(i) / (steps - 1), ty = static_cast<double>(j) / (steps - 1);
      g(i * steps + j, 0) = lo(0) - pad(0) + tx * (hi(0) - lo(0) + 2 * pad(0));
      g(i * steps + j, 1) = lo(1) - pad(1) + ty * (hi(1) - lo(1) + 2 * pad(1));
    }
  const Matrix s = m.scores(g);
  auto out = open_out(path);
  out << "x1,x2";
  for (const auto& c : m.class_names) out << ",score:" << c;
  out << "\n";
  for (Index r = 0; r < g.rows(); ++r) {
    out << num(g(r, 0)) << "," << num(g(r, 1));
    for (Index k = 0; k < s.cols(); ++k) out << "," << num(s(r, k));
    out << "\n";
  }
}

int run_predict(const PredictArgs& a) {
  const SavedModel m = load_model(a.model);
  const Matrix x = load_features(a.data, a.label_prefix, a.class_column);
  const Matrix s = m.scores(x);
  const auto sets = predict_label_sets(s, m.task);
  auto out = open_out(a.out);
  out << "index";
  for (const auto& c : m.class_names) out << ",score:" << c;
  out << ",labels\n";
  for (Index i = 0; i < s.rows(); ++i) {
    out << i;
    for (Index k = 0; k < s.cols(); ++k) out << "," << num(s(i, k));
    out << "," << to_bitstring(sets[static_cast<std::size_t>(i)], s.cols()) << "\n";
  }
  if (!a.boundary.empty()) dump_boundary(m, x, a.grid_steps, a.boundary);
  return kOk;
}

struct EvaluateArgs {
  std::string pred, truth, json_out, label_prefix = "label:";
};

// Label sets from either a prediction file (a "labels" bitstring column) or a
// dataset file (label columns).
std::pair<std::vector<LabelSet>, Index> load_label_sets(const std::string& path, const std::string& prefix) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  const auto cols = detail::split_csv_line(header);
  const auto it = std::find(cols.begin(), cols.end(), "labels");
  if (it == cols.end()) {
    CsvOptions o;
    o.label_prefix = prefix;
    o.allow_empty_label_rows = true;
    const Dataset ds = load_csv(path, o);
    return {ds.label_sets(), ds.k()};
  }
  const auto col = static_cast<std::size_t>(it - cols.begin());
  std::vector<LabelSet> out;
  Index k = -1;
  std::string line;
  for (std::size_t row = 1; std::getline(in, line);) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != cols.size())
      throw Error(ErrorKind::MalformedCsv, "row " + std::to_string(row - 1) + " has " + std::to_string(cells.size()) +
                                               " cells, header has " + std::to_string(cols.size()));
    const std::string bits = detail::trim(cells[col]);
    if (k < 0) k = static_cast<Index>(bits.size());
    if (static_cast<Index>(bits.size()) != k)
      throw Error(ErrorKind::MalformedCsv, "row " + std::to_string(row - 1) + ": inconsistent label width");
    out.push_back(from_bitstring(bits));
  }
  return {out, std::max<Index>(k, 0)};
}

int run_evaluate(const EvaluateArgs& a) {
  const auto [pred, kp] = load_label_sets(a.pred, a.label_prefix);
  const auto [truth, kt] = load_label_sets(a.truth, a.label_prefix);
  if (kp != kt)
    throw Error(ErrorKind::DimensionMismatch,
                "prediction has " + std::to_string(kp) + " classes, truth has " + std::to_string(kt));
  const MetricsReport r = evaluate(pred, truth, kt);
  const std::pair<const char*, double> rows[] = {{"accuracy", r.accuracy},   {"hamming_loss", r.hamming_loss},
                                                 {"exact_match", r.exact_match}, {"precision", r.precision},
                                                 {"recall", r.recall},       {"f1", r.f1}};
  for (const auto& [name, v] : rows) std::printf("%-12s %.6f\n", name, v);
  std::printf("%-12s %lld\n", "instances", static_cast<long long>(r.n_instances));
  if (!a.json_out.empty()) open_out(a.json_out) << metrics_to_json(r).dump(1) << "\n";
  return kOk;
}

struct CvArgs {
  std::string data, grid, task = "multiclass", solver = "linear", json_out, label_prefix = "label:", class_column;
  std::uint64_t seed = 0;
  bool seed_set = false, ovr = false, normalize = false;
  unsigned threads = 0;
};

int run_cv(const CvArgs& a) {
  Dataset ds = load_csv(a.data, csv_options(a.label_prefix, a.class_column));
  if (a.normalize) normalize_minmax(ds);
  GridSpec g = a.grid.empty() ? GridSpec{} : load_grid(a.grid);
  if (a.seed_set) g.seed = a.seed;
  CvOptions opt;
  opt.task = parse_task(a.task);
  opt.solver = parse_solver_kind(a.solver);
  opt.one_vs_rest = a.ovr;
  opt.threads = a.threads;
  const CVReport r = grid_search_cv(ds, g, opt);
  std::printf("%-48s %8s %8s\n", "tuple", "accuracy", "hamming");
  for (const auto& t : r.tuples) {
    if (t.infeasible) std::printf("%-48s %8s %8s\n", t.tuple.describe(opt.solver).c_str(), "infeas.", "-");
    else std::printf("%-48s %8.4f %8.4f\n", t.tuple.describe(opt.solver).c_str(), t.mean_accuracy, t.mean_hamming);
  }
  std::printf("best: %s  accuracy %.4f  hamming %.4f  (%zu of %zu tuples feasible, %d folds, seed %llu)\n",
              r.best_tuple.describe(opt.solver).c_str(), r.best_mean_accuracy, r.best_mean_hamming, r.feasible_count(),
              r.tuples.size(), r.n_folds, static_cast<unsigned long long>(r.seed));
  if (!a.json_out.empty()) save_cv_report(r, a.json_out);
  return kOk;
}

struct ReproduceArgs {
  std::string table, data_dir = OVN_DATA_DIR;
  unsigned threads = 0;
};

int run_reproduce(const ReproduceArgs& a) {
  CvOptions opt;
  opt.threads = a.threads;
  repro::Table t;
  if (a.table == "t3") t = repro::table_two_class();
  else if (a.table == "t4") t = repro::table_multiclass(a.data_dir, opt);
  else if (a.table == "t5") t = repro::table_multilabel(a.data_dir, opt);
  else if (a.table == "unseen") t = repro::table_unseen();
  else throw Error(ErrorKind::UnknownKind, "unknown table '" + a.table + "'");
  repro::print(t, std::cout);
  return t.ok() ? kOk : kBands;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-versus-none multiclass/multilabel SVM"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--kind", sa.kind, "hourglass|moon|random_two_class|unseen_label_toy|symmetric_parallel")
      ->required();
  synth->add_option("--seed", sa.seed);
  synth->add_option("--out", sa.out, "training CSV")->required();
  synth->add_option("--test-out", sa.test_out, "test CSV (default <out stem>.test.csv when the kind has one)");
  synth->add_option("--n-per-cluster", sa.n_per_cluster);
  synth->add_option("--noise", sa.noise);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Fit a model and save it");
  train->add_option("--data", ta.data)->required();
  train->add_option("--task", ta.task, "multiclass|multilabel");
  train->add_option("--solver", ta.solver, "linear|kernel");
  train->add_option("--mode", ta.mode, "sw-sb|sw-hb|hw-sb|hw-hb");
  train->add_option("--alpha,--theta", ta.alpha, "pairwise weight coupling");
  train->add_option("--beta", ta.beta, "hinge weight");
  train->add_option("--gamma", ta.gamma, "soft bias-sum weight");
  train->add_option("--kernel", ta.kernel, "linear|gaussian|poly");
  train->add_option("--sigma", ta.sigma);
  train->add_option("--degree", ta.degree);
  train->add_option("--coef0", ta.coef0);
  train->add_option("--ridge", ta.ridge, "Gram diagonal jitter");
  train->add_option("--epsilon", ta.epsilon);
  train->add_option("--tol", ta.tol);
  train->add_option("--max-iters", ta.max_iters);
  train->add_flag("--normalize", ta.normalize, "min-max scale features to [0,1]");
  train->add_option("--label-prefix", ta.label_prefix);
  train->add_option("--class-column", ta.class_column, "categorical column to expand one-hot");
  train->add_option("--model-out", ta.model_out)->required();

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Score a dataset with a saved model");
  predict->add_option("--model", pa.model)->required();
  predict->add_option("--data", pa.data)->required();
  predict->add_option("--out", pa.out)->required();
  predict->add_option("--dump-boundary", pa.boundary, "write a grid of decision scores (2-D data)");
  predict->add_option("--grid-steps", pa.grid_steps);
  predict->add_option("--label-prefix", pa.label_prefix);
  predict->add_option("--class-column", pa.class_column);

  EvaluateArgs ea;
  auto* eval = app.add_subcommand("evaluate", "Compare predicted and true label sets");
  eval->add_option("--pred", ea.pred)->required();
  eval->add_option("--truth", ea.truth)->required();
  eval->add_option("--json-out", ea.json_out);
  eval->add_option("--label-prefix", ea.label_prefix);

  CvArgs ca;
  auto* cv = app.add_subcommand("cv", "Cross-validated grid search");
  cv->add_option("--data", ca.data)->required();
  cv->add_option("--grid", ca.grid, "JSON grid file (defaults when omitted)");
  cv->add_option("--seed", ca.seed)->each([&](const std::string&) { ca.seed_set = true; });
  cv->add_option("--task", ca.task);
  cv->add_option("--solver", ca.solver);
  cv->add_flag("--ovr", ca.ovr, "score the one-vs-rest baseline instead");
  cv->add_flag("--normalize", ca.normalize);
  cv->add_option("--threads", ca.threads, "worker threads (default OVN_THREADS or all cores)");
  cv->add_option("--json-out", ca.json_out);
  cv->add_option("--label-prefix", ca.label_prefix);
  cv->add_option("--class-column", ca.class_column);

  ReproduceArgs ra;
  auto* rep = app.add_subcommand("reproduce", "Run a scripted reproduction and compare with reference numbers");
  rep->add_option("--table", ra.table, "t3|t4|t5|unseen")->required();
  rep->add_option("--data-dir", ra.data_dir);
  rep->add_option("--threads", ra.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*synth) return run_synth(sa);
    if (*train) return run_train(ta);
    if (*predict) return run_predict(pa);
    if (*eval) return run_evaluate(ea);
    if (*cv) return run_cv(ca);
    if (*rep) return run_reproduce(ra);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: IoError: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
