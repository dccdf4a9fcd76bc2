#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "lvgg/error.hpp"
#include "lvgg/evalcv.hpp"
#include "lvgg/solver.hpp"
#include "testkit.hpp"

using namespace lvgg;
using testkit::MatrixXd;

namespace {

Dataset small_dataset(std::uint64_t seed, Index p = 6, Index n = 90) {
  testkit::Gen gen(seed);
  return sample_gaussian(SymMatrix::from_dense(gen.spd(p, 0.5)), n, seed);
}

CvPlan small_plan(std::vector<double> g1, std::vector<double> g2) {
  CvPlan plan;
  plan.folds = 4;
  plan.lambda1_grid = std::move(g1);
  plan.lambda2_grid = std::move(g2);
  plan.split_seed = 11;
  return plan;
}

SolverConfig fast_config() {
  SolverConfig c;
  c.mu = 0.5;
  c.epsilon = 1e-6;
  return c;
}

void expect_same_report(const CvReport& a, const CvReport& b) {
  EXPECT_EQ(a.best_lambda1, b.best_lambda1);
  EXPECT_EQ(a.best_lambda2, b.best_lambda2);
  EXPECT_EQ(a.heldout_nloglike, b.heldout_nloglike);
  EXPECT_EQ(a.rank_l, b.rank_l);
  EXPECT_EQ(a.nnz_offdiag_s, b.nnz_offdiag_s);
  ASSERT_EQ(a.cells.size(), b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].fold_nloglike, b.cells[i].fold_nloglike);
    EXPECT_EQ(a.cells[i].mean_nloglike, b.cells[i].mean_nloglike);
  }
}

}  // namespace

TEST(NLogLike, ClosedForms) {
  EXPECT_NEAR(nloglike(SymMatrix::identity(4), SymMatrix::identity(4)), 4.0, 1e-15);
  testkit::Gen gen(3);
  const MatrixXd sigma = gen.spd(4);
  const double v = nloglike(SymMatrix::from_dense(sigma.inverse()), SymMatrix::from_dense(sigma));
  EXPECT_NEAR(v, testkit::naive_log_det(sigma) + 4.0, 1e-10);
}

TEST(NLogLike, MatchesNaiveAndRespectsLowerBound) {
  testkit::Gen gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd a = gen.spd(3), s = gen.spd(3);
    const double v = nloglike(SymMatrix::from_dense(a), SymMatrix::from_dense(s));
    EXPECT_NEAR(v, testkit::naive_nloglike(a, s), 1e-12 * std::max(1.0, std::abs(v)));
    EXPECT_GE(v, nloglike(SymMatrix::from_dense(s.inverse()), SymMatrix::from_dense(s)) - 1e-12);
  }
  MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(nloglike(SymMatrix::from_dense(bad), SymMatrix::identity(2)), DomainError);
}

TEST(Split, SizesAndPartition) {
  const TrainTestSplit s = split_rows(300, 2.0 / 3.0, 4);
  EXPECT_EQ(s.train.size(), 200u);
  EXPECT_EQ(s.test.size(), 100u);
  std::set<Index> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 300u);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  const TrainTestSplit again = split_rows(300, 2.0 / 3.0, 4);
  EXPECT_EQ(again.train, s.train);
  EXPECT_NE(split_rows(300, 2.0 / 3.0, 5).train, s.train);
  EXPECT_THROW(split_rows(3, 0.01, 1), ConfigError);
}

TEST(Folds, PartitionWithBalancedSizes) {
  for (auto [n, k] : std::vector<std::pair<Index, int>>{{200, 10}, {17, 4}, {5, 5}}) {
    const std::vector<int> f = assign_folds(n, k, 8);
    ASSERT_EQ(f.size(), static_cast<std::size_t>(n));
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (int v : f) {
      ASSERT_GE(v, 0);
      ASSERT_LT(v, k);
      ++count[static_cast<std::size_t>(v)];
    }
    const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
    EXPECT_LE(*hi - *lo, 1);
  }
  EXPECT_THROW(assign_folds(3, 4, 1), ConfigError);
  EXPECT_THROW(assign_folds(10, 1, 1), ConfigError);
}

TEST(HeldoutCovariance, CentersWithReferenceMeans) {
  MatrixXd x(4, 1);
  x << 1, 3, 10, 12;
  const Dataset d = make_dataset(x);
  // Reference rows {0,1} have mean 2; held rows {2,3} deviate by 8 and 10.
  const SymMatrix s = heldout_covariance(d, {2, 3}, {0, 1});
  EXPECT_NEAR(s(0, 0), (64.0 + 100.0) / 2.0, 1e-12);
}

TEST(CrossValidate, SingleCellEqualsDirectPipeline) {
  const Dataset d = small_dataset(21);
  const CvPlan plan = small_plan({0.05}, {0.3});
  const SolverConfig cfg = fast_config();
  const CvReport r = cross_validate(d, plan, cfg, ModelKind::kLvgg);
  EXPECT_EQ(r.best_lambda1, 0.05);
  EXPECT_EQ(r.best_lambda2, 0.3);

  const TrainTestSplit s = split_rows(d.samples.rows(), plan.train_fraction, plan.split_seed);
  const SymMatrix train = empirical_covariance(subset_rows(d, s.train));
  const SymMatrix test = heldout_covariance(d, s.test, s.train);
  const SolverResult fit = solve_lvgg({train, 0.05, 0.3}, cfg).result;
  EXPECT_EQ(r.heldout_nloglike, nloglike(fit.a_hat, test));
  EXPECT_EQ(r.n_train + r.n_test, d.samples.rows());
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0].fold_nloglike.size(), 4u);
}

TEST(CrossValidate, DeterministicAndThreadIndependent) {
  const Dataset d = small_dataset(23);
  CvPlan plan = small_plan({0.02, 0.05, 0.1}, {0.1, 0.3});
  const CvReport a = cross_validate(d, plan, fast_config(), ModelKind::kLvgg);
  const CvReport b = cross_validate(d, plan, fast_config(), ModelKind::kLvgg);
  expect_same_report(a, b);
  plan.threads = 3;
  expect_same_report(a, cross_validate(d, plan, fast_config(), ModelKind::kLvgg));
}

TEST(CrossValidate, BestCellIsArgmin) {
  const Dataset d = small_dataset(25);
  const CvReport r =
      cross_validate(d, small_plan({0.01, 0.05, 0.2}, {0.05, 0.5}), fast_config(), ModelKind::kLvgg);
  ASSERT_EQ(r.cells.size(), 6u);
  double best = std::numeric_limits<double>::infinity();
  for (const CvCell& c : r.cells) best = std::min(best, c.mean_nloglike);
  for (const CvCell& c : r.cells) {
    if (c.lambda1 == r.best_lambda1 && c.lambda2 == r.best_lambda2) {
      EXPECT_EQ(c.mean_nloglike, best);
    }
  }
  EXPECT_EQ(r.cells[1].lambda1, 0.01);
  EXPECT_EQ(r.cells[1].lambda2, 0.5);
}

TEST(CrossValidate, TiesGoToStrongerRegularization) {
  // Both λ2 values are large enough to force L = 0, giving identical cells.
  const Dataset d = small_dataset(27);
  const CvReport r =
      cross_validate(d, small_plan({0.05}, {500.0, 1000.0}), fast_config(), ModelKind::kLvgg);
  EXPECT_EQ(r.cells[0].mean_nloglike, r.cells[1].mean_nloglike);
  EXPECT_EQ(r.best_lambda2, 1000.0);
}

TEST(CrossValidate, SggIgnoresLambda2) {
  const Dataset d = small_dataset(29);
  const CvReport r = cross_validate(d, small_plan({0.02, 0.1}, {}), fast_config(), ModelKind::kSgg);
  ASSERT_EQ(r.cells.size(), 2u);
  for (const CvCell& c : r.cells) EXPECT_EQ(c.lambda2, 0.0);
  EXPECT_EQ(r.rank_l, 0);
  EXPECT_EQ(r.model, ModelKind::kSgg);
}

TEST(CrossValidate, PlanValidation) {
  const Dataset d = small_dataset(31);
  EXPECT_THROW(cross_validate(d, small_plan({}, {0.1}), fast_config(), ModelKind::kLvgg),
               ConfigError);
  EXPECT_THROW(cross_validate(d, small_plan({0.1}, {}), fast_config(), ModelKind::kLvgg),
               ConfigError);
  EXPECT_THROW(cross_validate(d, small_plan({0.2, 0.1}, {0.1}), fast_config(), ModelKind::kLvgg),
               ConfigError);
  CvPlan plan = small_plan({0.1}, {0.1});
  plan.folds = 1;
  EXPECT_THROW(cross_validate(d, plan, fast_config(), ModelKind::kLvgg), ConfigError);
  EXPECT_THROW(model_kind_from_string("pca"), ConfigError);
  EXPECT_EQ(model_kind_from_string("sgg"), ModelKind::kSgg);
}
