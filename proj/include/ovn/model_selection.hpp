#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ovn/kernel_solver.hpp"
#include "ovn/linear_solver.hpp"
#include "ovn/predict.hpp"

namespace ovn {

/// Shuffled folds whose sizes differ by at most one; the first n % k folds
/// get the extra element.
inline std::vector<std::vector<Index>> kfold_split(Index n, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 folds");
  if (n < k)
    throw Error(ErrorKind::TooFewInstances,
                std::to_string(n) + " instances cannot fill " + std::to_string(k) + " folds");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  const Index base = n / k, extra = n % k;
  Index pos = 0;
  for (int f = 0; f < k; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    auto& fold = folds[static_cast<std::size_t>(f)];
    fold.assign(order.begin() + pos, order.begin() + pos + size);
    std::sort(fold.begin(), fold.end());
    pos += size;
  }
  return folds;
}

enum class SolverKind { linear, kernel };

inline SolverKind parse_solver_kind(const std::string& s) {
  if (s == "linear") return SolverKind::linear;
  if (s == "kernel") return SolverKind::kernel;
  throw Error(ErrorKind::UnknownKind, "unknown solver '" + s + "'");
}

inline std::string to_string(SolverKind s) { return s == SolverKind::linear ? "linear" : "kernel"; }

/// Hyperparameter grid. Alphas apply to soft-weight modes only, gammas to
/// soft-bias modes only, sigmas/degrees to the matching kernel kind.
struct GridSpec {
  std::vector<double> alphas{-0.5, 0.0, 0.5, 1.0, 1.5};
  std::vector<double> betas{0.1, 1.0, 10.0, 100.0};
  std::vector<double> gammas{0.1, 1.0, 10.0};
  std::vector<double> sigmas{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<int> degrees{2};
  double coef0 = 1.0;
  KernelKind kernel = KernelKind::gaussian;
  std::vector<ConstraintMode> modes{ConstraintMode::soft_w_hard_b()};
  std::uint64_t seed = 0;
  int n_folds = 3;
  /// epsilon, tol and max_iters are taken from here.
  Hyperparameters base;

  void validate() const {
    auto need = [](bool ok, const char* what) {
      if (!ok) throw Error(ErrorKind::InvalidArgument, std::string("grid: ") + what);
    };
    need(!alphas.empty() && !betas.empty() && !gammas.empty() && !modes.empty(), "empty parameter list");
    need(n_folds >= 2, "n_folds must be >= 2");
    for (double b : betas) need(b > 0.0, "betas must be > 0");
    if (kernel == KernelKind::gaussian) {
      need(!sigmas.empty(), "empty sigma list");
      for (double s : sigmas) need(s > 0.0, "sigmas must be > 0");
    }
    if (kernel == KernelKind::polynomial) {
      need(!degrees.empty(), "empty degree list");
      for (int d : degrees) need(d >= 1, "degrees must be >= 1");
    }
  }
};

/// One point of the grid.
struct GridTuple {
  ConstraintMode mode;
  Hyperparameters hp;
  KernelSpec kernel;

  std::string describe(SolverKind solver) const {
    std::ostringstream o;
    o << mode.name();
    if (!mode.hard_w()) o << " " << (solver == SolverKind::kernel ? "theta" : "alpha") << "=" << hp.alpha;
    o << " beta=" << hp.beta;
    if (!mode.hard_b()) o << " gamma=" << hp.gamma;
    if (solver == SolverKind::kernel) {
      o << " kernel=" << to_string(kernel.kind);
      if (kernel.kind == KernelKind::gaussian) o << " sigma=" << kernel.sigma;
      if (kernel.kind == KernelKind::polynomial) o << " degree=" << kernel.degree;
    }
    return o.str();
  }
};

/// Expands the grid in a fixed order: mode, kernel parameter, alpha, beta, gamma.
inline std::vector<GridTuple> expand_grid(const GridSpec& g, SolverKind solver) {
  g.validate();
  std::vector<KernelSpec> kernels;
  if (solver == SolverKind::linear || g.kernel == KernelKind::linear) kernels.push_back(KernelSpec::linear());
  else if (g.kernel == KernelKind::gaussian)
    for (double s : g.sigmas) kernels.push_back(KernelSpec::gaussian(s));
  else
    for (int d : g.degrees) kernels.push_back(KernelSpec::polynomial(d, g.coef0));

  std::vector<GridTuple> out;
  for (const ConstraintMode& mode : g.modes)
    for (const KernelSpec& ks : kernels) {
      const std::vector<double> alphas = mode.hard_w() ? std::vector<double>{0.0} : g.alphas;
      const std::vector<double> gammas = mode.hard_b() ? std::vector<double>{g.base.gamma} : g.gammas;
      for (double a : alphas)
        for (double b : g.betas)
          for (double c : gammas) {
            Hyperparameters hp = g.base;
            hp.alpha = a;
            hp.beta = b;
            hp.gamma = c;
            out.push_back({mode, hp, ks});
          }
    }
  return out;
}

struct TupleResult {
  GridTuple tuple;
  std::vector<MetricsReport> folds;
  bool infeasible = false;
  std::string reason;
  double mean_accuracy = std::numeric_limits<double>::quiet_NaN();
  double mean_hamming = std::numeric_limits<double>::quiet_NaN();
};

struct CVReport {
  Task task = Task::multiclass;
  SolverKind solver = SolverKind::linear;
  bool one_vs_rest = false;
  int n_folds = 3;
  std::uint64_t seed = 0;
  std::vector<TupleResult> tuples;
  std::size_t best_index = 0;
  GridTuple best_tuple;
  double best_mean_accuracy = std::numeric_limits<double>::quiet_NaN();
  double best_mean_hamming = std::numeric_limits<double>::quiet_NaN();

  std::size_t feasible_count() const {
    return static_cast<std::size_t>(
        std::count_if(tuples.begin(), tuples.end(), [](const TupleResult& t) { return !t.infeasible; }));
  }
};

// ---------------------------------------------------------------------------
// One-versus-rest baseline

/// Binary machine of one class against the rest, or a constant when the class
/// (or its complement) is empty.
struct OvrClassModel {
  bool trainable = true;
  double constant = 0.0;  // score used when untrainable
  std::optional<TrainedLinearModel> linear;
  std::optional<TrainedKernelModel> kernel;
};

struct OvrModel {
  std::vector<OvrClassModel> classes;

  std::vector<int> untrainable() const {
    std::vector<int> out;
    for (std::size_t k = 0; k < classes.size(); ++k)
      if (!classes[k].trainable) out.push_back(static_cast<int>(k));
    return out;
  }

  /// N x K binary decision values.
  Matrix scores(const Matrix& x) const {
    Matrix s(x.rows(), static_cast<Index>(classes.size()));
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const auto& c = classes[k];
      if (!c.trainable) s.col(static_cast<Index>(k)).setConstant(c.constant);
      else if (c.linear) s.col(static_cast<Index>(k)) = c.linear->scores(x).col(0);
      else s.col(static_cast<Index>(k)) = c.kernel->scores(x).col(0);
    }
    return s;
  }
};

/// Sign rule at 0 for label sets, with the arg-max class when no score is
/// non-negative; arg-max for single labels.
inline constexpr double kOvrThreshold = 0.0;

inline std::vector<LabelSet> ovr_predict(const Matrix& scores, Task task) {
  if (task == Task::multiclass) return predict_label_sets(scores, task);
  std::vector<LabelSet> out;
  for (Index i = 0; i < scores.rows(); ++i) out.push_back(predict_multilabel(scores.row(i).transpose(), kOvrThreshold));
  return out;
}

namespace detail {

inline Dataset one_vs_rest(const Dataset& ds, Index k) {
  Dataset b;
  b.features = ds.features;
  b.labels.resize(ds.n(), 2);
  for (Index i = 0; i < ds.n(); ++i) {
    b.labels(i, 0) = ds.labels(i, k) != 0 ? 1 : 0;
    b.labels(i, 1) = 1 - b.labels(i, 0);
  }
  b.class_names = {ds.class_names.empty() ? "k" : ds.class_names[static_cast<std::size_t>(k)], "rest"};
  b.feature_names = ds.feature_names;
  return b;
}

}  // namespace detail

/// K binary soft-margin machines, each an OvN fit with hard weights and
/// biases on {class k, rest}. The gram overload slices a precomputed matrix.
inline OvrModel ovr_baseline_fit(const Dataset& ds, const Hyperparameters& hp,
                                 const std::optional<KernelSpec>& kernel = std::nullopt,
                                 const GramMatrix* precomputed = nullptr) {
  const ConstraintMode mode = ConstraintMode::hard_w_hard_b();
  OvrModel m;
  for (Index k = 0; k < ds.k(); ++k) {
    OvrClassModel c;
    const Index pos = ds.labels.col(k).count();
    if (pos == 0 || pos == ds.n()) {
      c.trainable = false;
      c.constant = pos == 0 ? -1.0 : 1.0;
    } else {
      const Dataset bin = detail::one_vs_rest(ds, k);
      if (kernel) c.kernel = precomputed ? fit_kernel(bin, *precomputed, *kernel, mode, hp)
                                         : fit_kernel(bin, *kernel, mode, hp);
      else c.linear = fit_linear(bin, mode, hp);
    }
    m.classes.push_back(std::move(c));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Grid search

struct CvOptions {
  Task task = Task::multiclass;
  SolverKind solver = SolverKind::linear;
  /// Score the one-versus-rest baseline instead of OvN (modes, alphas and
  /// gammas are then ignored).
  bool one_vs_rest = false;
  /// 0 reads OVN_THREADS, falling back to the hardware concurrency.
  unsigned threads = 0;
};

inline unsigned default_thread_count() {
  if (const char* env = std::getenv("OVN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

// Fold datasets where every class keeps at least one training pattern. Classes
// missing from a training fold are dropped for that fold and never predicted.
struct FoldData {
  std::vector<Index> train_rows, test_rows;
  std::vector<Index> kept;  // original class indices present in training
  Dataset train;
  std::vector<LabelSet> truths;
};

inline std::vector<FoldData> make_folds(const Dataset& ds, const std::vector<std::vector<Index>>& folds) {
  std::vector<FoldData> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    FoldData fd;
    fd.test_rows = folds[f];
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) fd.train_rows.insert(fd.train_rows.end(), folds[g].begin(), folds[g].end());
    std::sort(fd.train_rows.begin(), fd.train_rows.end());
    Dataset tr = ds.subset(fd.train_rows);
    for (Index k = 0; k < tr.k(); ++k)
      if (tr.labels.col(k).any()) fd.kept.push_back(k);
    if (static_cast<Index>(fd.kept.size()) != tr.k()) {
      LabelMatrix l(tr.n(), static_cast<Index>(fd.kept.size()));
      std::vector<std::string> names;
      for (std::size_t j = 0; j < fd.kept.size(); ++j) {
        l.col(static_cast<Index>(j)) = tr.labels.col(fd.kept[j]);
        if (!tr.class_names.empty()) names.push_back(tr.class_names[static_cast<std::size_t>(fd.kept[j])]);
      }
      tr.labels = l;
      tr.class_names = names;
    }
    fd.train = std::move(tr);
    for (Index i : fd.test_rows) fd.truths.push_back(ds.label_set(i));
    out.push_back(std::move(fd));
  }
  return out;
}

// Expand fold-local class scores to the full class set; dropped classes get
// -infinity so neither rule can select them.
inline Matrix expand_scores(const Matrix& local, const std::vector<Index>& kept, Index classes) {
  Matrix s = Matrix::Constant(local.rows(), classes, -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < kept.size(); ++j) s.col(kept[j]) = local.col(static_cast<Index>(j));
  return s;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// k-fold grid search. Each tuple is scored by the mean held-out accuracy
/// (exact match of single labels for multiclass, label-set accuracy for
/// multilabel). Tuples whose fits hit a solver error are marked infeasible.
/// Results do not depend on the thread count.
inline CVReport grid_search_cv(const Dataset& ds, const GridSpec& grid, const CvOptions& opt) {
  ds.validate(true);
  GridSpec g = grid;
  if (opt.one_vs_rest) {
    g.modes = {ConstraintMode::hard_w_hard_b()};
    g.alphas = {0.0};
  }
  const std::vector<GridTuple> tuples = expand_grid(g, opt.solver);
  const auto folds = detail::make_folds(ds, kfold_split(ds.n(), g.n_folds, g.seed));

  // Kernel matrices over the full dataset, one per distinct kernel; fold
  // systems are sliced from them.
  std::vector<KernelSpec> kernels;
  std::vector<std::size_t> kernel_of(tuples.size(), 0);
  if (opt.solver == SolverKind::kernel)
    for (std::size_t t = 0; t < tuples.size(); ++t) {
      auto it = std::find(kernels.begin(), kernels.end(), tuples[t].kernel);
      kernel_of[t] = static_cast<std::size_t>(it - kernels.begin());
      if (it == kernels.end()) kernels.push_back(tuples[t].kernel);
    }
  std::vector<Matrix> full(kernels.size());
  for (std::size_t i = 0; i < kernels.size(); ++i) full[i] = gram(kernels[i], ds.features, 0.0).values;

  const std::size_t F = folds.size();
  std::vector<MetricsReport> scores(tuples.size() * F);
  std::vector<std::string> failure(tuples.size() * F);
  std::vector<char> failed(tuples.size() * F, 0);

  detail::parallel_for(tuples.size() * F, opt.threads ? opt.threads : default_thread_count(), [&](std::size_t job) {
    const std::size_t t = job / F, f = job % F;
    const GridTuple& tp = tuples[t];
    const detail::FoldData& fd = folds[f];
    const Matrix test = ds.features(fd.test_rows, Eigen::all);
    try {
      Matrix local;
      if (opt.solver == SolverKind::kernel) {
        const Matrix& G = full[kernel_of[t]];
        GramMatrix gtrain{G(fd.train_rows, fd.train_rows), kDefaultGramRidge};
        gtrain.values.diagonal().array() += kDefaultGramRidge;
        const Matrix cross = G(fd.train_rows, fd.test_rows);  // Ntrain x T
        if (opt.one_vs_rest) {
          const OvrModel m = ovr_baseline_fit(fd.train, tp.hp, tp.kernel, &gtrain);
          local.resize(cross.cols(), static_cast<Index>(m.classes.size()));
          for (std::size_t k = 0; k < m.classes.size(); ++k) {
            const auto& c = m.classes[k];
            local.col(static_cast<Index>(k)) =
                c.trainable ? Vector((cross.transpose() * c.kernel->A.row(0).transpose()).array() + c.kernel->b(0))
                            : Vector::Constant(cross.cols(), c.constant);
          }
        } else {
          const TrainedKernelModel m = fit_kernel(fd.train, gtrain, tp.kernel, tp.mode, tp.hp);
          local = (cross.transpose() * m.A.transpose()).rowwise() + m.b.transpose();
        }
      } else if (opt.one_vs_rest) {
        local = ovr_baseline_fit(fd.train, tp.hp).scores(test);
      } else {
        local = fit_linear(fd.train, tp.mode, tp.hp).scores(test);
      }
      const Matrix s = detail::expand_scores(local, fd.kept, ds.k());
      const auto preds = opt.one_vs_rest ? ovr_predict(s, opt.task) : predict_label_sets(s, opt.task);
      scores[job] = evaluate(preds, fd.truths, ds.k());
    } catch (const Error& e) {
      if (!e.is_solver_error()) throw;
      failed[job] = 1;
      failure[job] = e.what();
    }
  });

  CVReport r;
  r.task = opt.task;
  r.solver = opt.solver;
  r.one_vs_rest = opt.one_vs_rest;
  r.n_folds = g.n_folds;
  r.seed = g.seed;
  bool any = false;
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    TupleResult tr;
    tr.tuple = tuples[t];
    for (std::size_t f = 0; f < F; ++f)
      if (failed[t * F + f]) {
        tr.infeasible = true;
        tr.reason = failure[t * F + f];
        break;
      }
    if (!tr.infeasible) {
      tr.folds.assign(scores.begin() + static_cast<std::ptrdiff_t>(t * F),
                      scores.begin() + static_cast<std::ptrdiff_t>((t + 1) * F));
      double acc = 0.0, ham = 0.0;
      for (const auto& m : tr.folds) {
        acc += m.accuracy;
        ham += m.hamming_loss;
      }
      tr.mean_accuracy = acc / static_cast<double>(F);
      tr.mean_hamming = ham / static_cast<double>(F);
      if (!any || tr.mean_accuracy > r.best_mean_accuracy) {
        any = true;
        r.best_index = t;
        r.best_tuple = tr.tuple;
        r.best_mean_accuracy = tr.mean_accuracy;
        r.best_mean_hamming = tr.mean_hamming;
      }
    }
    r.tuples.push_back(std::move(tr));
  }
  if (!any) throw Error(ErrorKind::AllTuplesInfeasible, "every grid tuple failed: " + r.tuples.front().reason);
  return r;
}

}  // namespace ovn
