#include "lvgg/evalcv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <tuple>

#include "lvgg/error.hpp"
#include "lvgg/random.hpp"
#include "lvgg/solver.hpp"

namespace lvgg {

namespace {

struct FoldData {
  SymMatrix sigma_train;
  SymMatrix sigma_val;
};

struct TaskResult {
  double nloglike = 0.0;
  bool converged = true;
  bool ok = true;
  std::string failure;
};

template <typename Fn>
void parallel_for(std::size_t count, int threads, const Fn& fn) {
  const auto workers =
      static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(count))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

bool sorted_positive(const std::vector<double>& grid) {
  if (grid.empty()) return false;
  for (double v : grid) {
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  return std::is_sorted(grid.begin(), grid.end());
}

}  // namespace

const char* to_string(ModelKind kind) { return kind == ModelKind::kLvgg ? "lvgg" : "sgg"; }

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "lvgg") return ModelKind::kLvgg;
  if (name == "sgg") return ModelKind::kSgg;
  throw ConfigError("unknown model '" + name + "' (expected lvgg or sgg)");
}

double nloglike(const SymMatrix& a_hat, const SymMatrix& sigma_test) {
  return -log_det_spd(a_hat) + trace_product(a_hat, sigma_test);
}

void CvPlan::validate(ModelKind model) const {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (!sorted_positive(lambda1_grid)) {
    throw ConfigError("lambda1 grid must be a nonempty sorted list of positive values");
  }
  if (model == ModelKind::kLvgg && !sorted_positive(lambda2_grid)) {
    throw ConfigError("lambda2 grid must be a nonempty sorted list of positive values");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

TrainTestSplit split_rows(Index n, double train_fraction, std::uint64_t seed) {
  const auto n_train = static_cast<Index>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    throw ConfigError("split_rows: train_fraction leaves an empty train or test set");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed, streams::kOuterSplit);
  rng.shuffle(order);
  TrainTestSplit split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed) {
  if (folds < 2 || static_cast<Index>(folds) > n) {
    throw ConfigError("assign_folds: need 2 <= folds <= number of rows");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed, streams::kFolds);
  rng.shuffle(order);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    fold[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  }
  return fold;
}

SymMatrix heldout_covariance(const Dataset& data, const std::vector<Index>& rows,
                             const std::vector<Index>& reference_rows) {
  Dataset held = subset_rows(data, rows);
  held.column_means = subset_rows(data, reference_rows).column_means;
  return empirical_covariance(held);
}

SolverResult fit_model(ModelKind model, const SymMatrix& sigma, double lambda1,
                       double lambda2, const SolverConfig& config) {
  if (model == ModelKind::kLvgg) {
    return solve_lvgg(LvggProblem{sigma, lambda1, lambda2}, config).result;
  }
  return solve_glasso(GlassoProblem{sigma, lambda1}, config).result;
}

CvReport cross_validate(const Dataset& data, const CvPlan& plan,
                        const SolverConfig& config, ModelKind model) {
  plan.validate(model);
  config.validate();
  const TrainTestSplit split =
      split_rows(data.samples.rows(), plan.train_fraction, plan.split_seed);
  const auto n_train = static_cast<Index>(split.train.size());
  if (static_cast<Index>(plan.folds) > n_train) {
    throw ConfigError("folds exceed the number of training rows");
  }

  const std::vector<int> fold_of = assign_folds(n_train, plan.folds, plan.split_seed);
  std::vector<FoldData> folds;
  folds.reserve(static_cast<std::size_t>(plan.folds));
  for (int f = 0; f < plan.folds; ++f) {
    std::vector<Index> fit_rows, val_rows;
    for (std::size_t r = 0; r < split.train.size(); ++r) {
      (fold_of[r] == f ? val_rows : fit_rows).push_back(split.train[r]);
    }
    folds.push_back({empirical_covariance(subset_rows(data, fit_rows)),
                     heldout_covariance(data, val_rows, fit_rows)});
  }

  const std::vector<double> lambda2_grid =
      model == ModelKind::kLvgg ? plan.lambda2_grid : std::vector<double>{0.0};
  std::vector<CvCell> cells;
  for (double l1 : plan.lambda1_grid) {
    for (double l2 : lambda2_grid) {
      CvCell cell;
      cell.lambda1 = l1;
      cell.lambda2 = l2;
      cells.push_back(cell);
    }
  }

  const std::size_t n_folds = folds.size();
  std::vector<TaskResult> tasks(cells.size() * n_folds);
  parallel_for(tasks.size(), plan.threads, [&](std::size_t t) {
    const CvCell& cell = cells[t / n_folds];
    const FoldData& fold = folds[t % n_folds];
    TaskResult& out = tasks[t];
    try {
      const SolverResult res =
          fit_model(model, fold.sigma_train, cell.lambda1, cell.lambda2, config);
      out.nloglike = nloglike(res.a_hat, fold.sigma_val);
      out.converged = res.converged;
    } catch (const Error& e) {
      out.ok = false;
      out.failure = e.what();
    }
  });

  CvReport report;
  report.model = model;
  report.folds = plan.folds;
  report.split_seed = plan.split_seed;
  report.n_train = n_train;
  report.n_test = static_cast<Index>(split.test.size());

  const CvCell* best = nullptr;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CvCell& cell = cells[c];
    double sum = 0.0;
    for (std::size_t f = 0; f < n_folds; ++f) {
      const TaskResult& tr = tasks[c * n_folds + f];
      if (!tr.ok) {
        cell.valid = false;
        cell.failure = tr.failure;
        break;
      }
      cell.fold_nloglike.push_back(tr.nloglike);
      if (!tr.converged) ++cell.unconverged_folds;
      sum += tr.nloglike;
    }
    if (!cell.valid) {
      cell.mean_nloglike = std::numeric_limits<double>::quiet_NaN();
      ++report.invalid_cells;
      continue;
    }
    cell.mean_nloglike = sum / static_cast<double>(n_folds);
    if (best == nullptr || cell.mean_nloglike < best->mean_nloglike ||
        (cell.mean_nloglike == best->mean_nloglike &&
         std::tie(cell.lambda1, cell.lambda2) > std::tie(best->lambda1, best->lambda2))) {
      best = &cell;
    }
  }
  if (best == nullptr) throw Error("cross_validate: every grid cell failed");

  report.best_lambda1 = best->lambda1;
  report.best_lambda2 = best->lambda2;
  report.cells = cells;

  const SymMatrix sigma_train = empirical_covariance(subset_rows(data, split.train));
  const SymMatrix sigma_test = heldout_covariance(data, split.test, split.train);
  const SolverResult refit =
      fit_model(model, sigma_train, report.best_lambda1, report.best_lambda2, config);
  report.heldout_nloglike = nloglike(refit.a_hat, sigma_test);
  report.rank_l = refit.rank_l;
  report.nnz_offdiag_s = refit.nnz_offdiag_s;
  report.refit_converged = refit.converged;
  return report;
}

}  // namespace lvgg
