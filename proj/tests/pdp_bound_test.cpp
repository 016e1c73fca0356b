#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "pdpaudit/pdp_bound.hpp"
#include "test_util.hpp"

using namespace pdpaudit;
using testutil::make_dataset;
using testutil::random_dataset;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Dispersion term recomputed from its definition with brute-force
// similarity sums.
double oracle_psi(const CategoricalDataset& data, std::int64_t target_row,
                  const DiffusionSchedule& sched, int t) {
  std::vector<int> target = data.row_copy(target_row);
  int n = data.n(), k = sched.k();
  double log_rb_t = sched.log_ratio_bar(t);
  double sim = testutil::oracle_similarity(data, target, log_rb_t, target_row);

  if (t == 1) {
    double coeff = 1.0 / sched.mu_bar_plus(1);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double res = testutil::oracle_restricted_similarity(data, target, i, log_rb_t,
                                                          target_row);
      if (res == 0.0) return kInf;
      sum += std::log1p(1.0 / res);
    }
    return coeff * sum / (1.0 + sim);
  }

  double a = (sched.alpha_bar(t - 1) - sched.alpha_bar(t)) /
             (k * sched.mu_bar_plus(t) * sched.mu_bar_minus(t));
  double rb_prev = sched.ratio_bar(t - 1);
  double b = rb_prev * rb_prev - 1.0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double res = testutil::oracle_restricted_similarity(data, target, i, log_rb_t,
                                                        target_row);
    sum += std::log1p(b / (rb_prev * rb_prev * res + sim + 1.0));
  }
  return a / (1.0 + sim) * sum;
}

// Smallest kappa whose upper binomial tail drops to the threshold,
// recomputed with long doubles and a Pascal recurrence.
int oracle_kappa(int n, double q, double threshold) {
  std::vector<long double> pmf(n + 1);
  long double flip = 1.0L - static_cast<long double>(q);
  std::vector<long double> binom(n + 1, 1.0L);
  for (int j = 1; j <= n; ++j) binom[j] = binom[j - 1] * (n - j + 1) / j;
  for (int j = 0; j <= n; ++j)
    pmf[j] = binom[j] * std::pow(flip, j) * std::pow(static_cast<long double>(q), n - j);
  for (int kappa = 0; kappa <= n; ++kappa) {
    long double tail = 0.0L;
    for (int j = kappa; j <= n; ++j) tail += pmf[j];
    if (static_cast<double>(tail) <= threshold) return kappa;
  }
  return n + 1;
}

}  // namespace

TEST_CASE("vartheta covers its edge cases") {
  CHECK(vartheta(10, 5, 100) == doctest::Approx(18.0));
  CHECK(vartheta(100, 5, 100) == doctest::Approx(0.0));
  CHECK(vartheta(10, 0, 100) == kInf);
}

TEST_CASE("psi term matches the brute-force oracle away from t = 1") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);
    int k = 2 + static_cast<int>(rng() % 3);
    int T = 3 + static_cast<int>(rng() % 6);
    CategoricalDataset data = random_dataset(rng, 6 + rng() % 25, n, k);
    std::int64_t row = static_cast<std::int64_t>(rng() % data.size());
    DiffusionSchedule sched = DiffusionSchedule::linear(T, k, 0.4 + 0.06 * (rng() % 10));
    NeighborTable table(data, row);
    for (int t = 2; t <= T; ++t) {
      PsiTerm got = psi_term(table, sched, t);
      double want = oracle_psi(data, row, sched, t);
      CHECK_FALSE(got.support_isolated);
      CHECK(testutil::close_rel(got.value, want, 1e-11));
    }
  }
}

TEST_CASE("psi term at t = 1 takes the analytic limit") {
  std::mt19937 rng(29);
  for (int trial = 0; trial < 15; ++trial) {
    int n = 2 + static_cast<int>(rng() % 3);
    int k = 2 + static_cast<int>(rng() % 3);
    CategoricalDataset data = random_dataset(rng, 8 + rng() % 20, n, k);
    std::int64_t row = static_cast<std::int64_t>(rng() % data.size());
    DiffusionSchedule sched = DiffusionSchedule::linear(5, k, 1.0);
    NeighborTable table(data, row);
    PsiTerm got = psi_term(table, sched, 1);
    double want = oracle_psi(data, row, sched, 1);
    if (std::isinf(want)) {
      CHECK(got.support_isolated);
      CHECK(got.value == kInf);
    } else {
      CHECK_FALSE(got.support_isolated);
      CHECK(testutil::close_rel(got.value, want, 1e-9));
    }
  }
}

TEST_CASE("support isolation is flagged exactly when a column is uncovered") {
  // target shares column values with nobody in column 1
  CategoricalDataset data = make_dataset({{0, 0, 1}, {0, 1, 1}, {1, 2, 0}, {0, 1, 0}}, 3);
  DiffusionSchedule sched = DiffusionSchedule::linear(4, 3, 1.0);
  NeighborTable isolated(data, std::int64_t{2});
  PsiTerm p1 = psi_term(isolated, sched, 1);
  CHECK(p1.support_isolated);
  CHECK(p1.value == kInf);
  // away from t = 1 the term stays finite
  PsiTerm p2 = psi_term(isolated, sched, 2);
  CHECK_FALSE(p2.support_isolated);
  CHECK(std::isfinite(p2.value));
  // a fully covered target is never isolated
  NeighborTable covered(data, std::int64_t{1});
  CHECK_FALSE(psi_term(covered, sched, 1).support_isolated);
}

TEST_CASE("binomial tail kappa agrees with direct summation") {
  std::mt19937 rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng() % 25);
    double q = 0.05 + 0.9 * (rng() % 1000) / 1000.0;
    double threshold = std::pow(10.0, -6.0 * (rng() % 1000) / 1000.0);
    CHECK(binomial_tail_kappa(n, q, threshold) == oracle_kappa(n, q, threshold));
  }
  CHECK(binomial_tail_kappa(10, 0.5, 1.0) == 0);
  CHECK(binomial_tail_kappa(10, 0.5, 2.0) == 0);
  // impossible threshold: even kappa = n has positive tail
  CHECK(binomial_tail_kappa(10, 0.5, 0.0) == 11);
}

TEST_CASE("radius selection returns a valid grid point in both modes") {
  std::mt19937 rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + static_cast<int>(rng() % 4);
    int k = 2 + static_cast<int>(rng() % 4);
    int T = 3 + static_cast<int>(rng() % 7);
    CategoricalDataset data = random_dataset(rng, 10 + rng() % 40, n, k);
    std::int64_t row = static_cast<std::int64_t>(rng() % data.size());
    DiffusionSchedule sched = DiffusionSchedule::linear(T, k, 1.0);
    NeighborTable table(data, row);
    for (BoundMode mode : {BoundMode::kMain, BoundMode::kRelaxed}) {
      BoundOptions opts;
      opts.mode = mode;
      for (int t = 1; t <= T; ++t) {
        double psi = psi_term(table, sched, t).value;
        EtaResult res = find_eta(table, sched, t, psi, opts);
        CHECK(res.eta >= 1);
        CHECK(res.eta <= n);
        CHECK(res.c_star_num >= 0);
        CHECK(res.radius == res.eta + res.c_star_num);
        CHECK(res.radius <= n);
        int j = find_c_star(table, sched, t, res.eta, opts);
        CHECK(j == res.c_star_num);
      }
    }
  }
}

TEST_CASE("radius saturates at n when the cumulative ratio is flat") {
  // long linear schedule: by t = T the kernel is nearly uniform
  CategoricalDataset data = sample_skewed(200, 4, 3, 0.6, 0, 11);
  DiffusionSchedule sched = DiffusionSchedule::linear(50, 3, 1.0);
  NeighborTable table(data, std::int64_t{0});
  BoundOptions opts;
  int t = 50;
  REQUIRE(std::fabs(sched.ratio_bar(t) - 1.0) < 1e-6);
  double psi = psi_term(table, sched, t).value;
  EtaResult res = find_eta(table, sched, t, psi, opts);
  CHECK(res.radius == 4);
}

TEST_CASE("literal main-text radii are still valid grid points") {
  std::mt19937 rng(47);
  CategoricalDataset data = random_dataset(rng, 30, 4, 3);
  DiffusionSchedule sched = DiffusionSchedule::sigmoid(6, 3, 2.0);
  NeighborTable table(data, std::int64_t{3});
  BoundOptions opts;
  opts.literal_main_text = true;
  for (int t = 1; t <= 6; ++t) {
    double psi = psi_term(table, sched, t).value;
    EtaResult res = find_eta(table, sched, t, psi, opts);
    CHECK(res.eta >= 1);
    CHECK(res.radius <= 4);
  }
}

TEST_CASE("second term follows the schedule") {
  DiffusionSchedule sched = DiffusionSchedule::linear(6, 4, 0.9);
  std::int64_t s = 50;
  int n = 7;
  CHECK(second_term(sched, 1, s, n) == doctest::Approx(n / 2500.0).epsilon(1e-14));
  for (int t = 2; t <= 6; ++t) {
    double want = n * (1.0 - 1.0 / sched.ratio_bar(t - 1)) / 2500.0;
    CHECK(second_term(sched, t, s, n) == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("error term vanishes without approximation slack and grows with it") {
  DiffusionSchedule sched = DiffusionSchedule::linear(6, 3, 1.0);
  for (int t = 1; t <= 6; ++t) CHECK(error_term(sched, t, 5, 0.0, 0.0) == 0.0);
  double small = error_term(sched, 3, 5, 1e-4, 1e-4);
  double large = error_term(sched, 3, 5, 1e-3, 1e-3);
  CHECK(small > 0.0);
  CHECK(large > small);
}

TEST_CASE("per-instance delta assembles its trace") {
  std::mt19937 rng(53);
  CategoricalDataset data = random_dataset(rng, 40, 4, 3);
  DiffusionSchedule sched = DiffusionSchedule::linear(6, 3, 1.0);
  double eps = 1.0;
  PointAudit audit = per_instance_delta(data, 7, sched, eps, 3, 0);
  CHECK(audit.row == 7);
  CHECK(audit.values == data.row_copy(7));
  REQUIRE(audit.trace.size() == 6);
  double total = 0.0;
  for (size_t i = 0; i < audit.trace.size(); ++i) {
    const RadiusTrace& tr = audit.trace[i];
    CHECK(tr.t == static_cast<int>(i) + 1);
    CHECK(tr.step_total >= 0.0);
    CHECK(tr.clamp >= 0.0);
    CHECK(tr.clamp <= 1.0);
    CHECK(tr.step_total ==
          doctest::Approx(tr.clamp * tr.psi_term + tr.second_term).epsilon(1e-12));
    total += tr.step_total;
  }
  double want = std::max(0.0, 3.0 * total / (eps * -std::expm1(-eps)));
  CHECK(audit.delta == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("per-instance delta is monotone in the obvious dials") {
  std::mt19937 rng(59);
  CategoricalDataset data = random_dataset(rng, 30, 3, 3);
  DiffusionSchedule sched = DiffusionSchedule::linear(5, 3, 1.0);

  double d_rs0 = per_instance_delta(data, 2, sched, 1.0, 1, 0).delta;
  double d_rs1 = per_instance_delta(data, 2, sched, 1.0, 1, 1).delta;
  double d_rs2 = per_instance_delta(data, 2, sched, 1.0, 1, 2).delta;
  CHECK(d_rs1 <= d_rs0);
  CHECK(d_rs2 <= d_rs1);

  double d_m1 = per_instance_delta(data, 2, sched, 1.0, 1, 0).delta;
  double d_m10 = per_instance_delta(data, 2, sched, 1.0, 10, 0).delta;
  CHECK(d_m10 == doctest::Approx(10.0 * d_m1).epsilon(1e-12));

  double d_eps_small = per_instance_delta(data, 2, sched, 0.1, 1, 0).delta;
  double d_eps_large = per_instance_delta(data, 2, sched, 5.0, 1, 0).delta;
  CHECK(d_eps_large < d_eps_small);
}

TEST_CASE("support-isolated targets get an infinite bound with the flag") {
  CategoricalDataset data = make_dataset({{0, 0}, {0, 1}, {2, 2}}, 3);
  DiffusionSchedule sched = DiffusionSchedule::linear(4, 3, 1.0);
  PointAudit audit = per_instance_delta(data, 2, sched, 1.0, 1, 0);
  CHECK(audit.support_isolated);
  CHECK(audit.delta == kInf);
  // releasing before the final step skips the divergent t = 1 term
  PointAudit later = per_instance_delta(data, 2, sched, 1.0, 1, 1);
  CHECK_FALSE(later.support_isolated);
  CHECK(std::isfinite(later.delta));
}

TEST_CASE("external targets use the full dataset as neighbours") {
  CategoricalDataset data = make_dataset({{0, 0}, {0, 1}, {1, 1}}, 2);
  DiffusionSchedule sched = DiffusionSchedule::linear(4, 2, 1.0);
  PointAudit external = per_instance_delta_external(data, {0, 0}, sched, 1.0, 1, 0);
  CHECK(external.row == -1);
  CHECK(external.values == std::vector<int>{0, 0});
  CHECK(external.delta >= 0.0);
}

TEST_CASE("audit_all deduplicates rows and is thread invariant") {
  CategoricalDataset data = make_dataset(
      {{0, 0, 1}, {1, 2, 0}, {0, 0, 1}, {2, 1, 1}, {1, 2, 0}, {0, 0, 1}}, 3);
  DiffusionSchedule sched = DiffusionSchedule::linear(5, 3, 1.0);
  std::vector<PointAudit> one = audit_all(data, sched, 1.0, 1, 0, {}, 1);
  std::vector<PointAudit> four = audit_all(data, sched, 1.0, 1, 0, {}, 4);
  REQUIRE(one.size() == 3);  // three distinct rows
  REQUIRE(four.size() == one.size());
  for (size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].row == four[i].row);
    CHECK(one[i].values == four[i].values);
    // bitwise equality, not approximate
    CHECK(one[i].delta == four[i].delta);
  }
  // representative index is the first occurrence
  for (const PointAudit& p : one) {
    PointAudit direct = per_instance_delta(data, p.row, sched, 1.0, 1, 0);
    CHECK(p.delta == direct.delta);
    bool is_first = true;
    for (std::int64_t r = 0; r < p.row; ++r)
      if (data.row_copy(r) == p.values) is_first = false;
    CHECK(is_first);
  }
}
