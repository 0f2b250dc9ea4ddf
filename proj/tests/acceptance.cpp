// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "topdog/core_model.hpp"
#include "topdog/error.hpp"
#include "topdog/optimizer.hpp"
#include "topdog/sampling.hpp"
#include "topdog/simulator.hpp"
#include "topdog/stockout.hpp"
#include "topdog/tdi.hpp"

namespace {

using namespace topdog;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and limits.
constexpr double kMetricTolerance = 1e-9;
constexpr double kSumTolerance = 1e-9;
constexpr double kHandTolerance = 1e-12;
constexpr double kOracleSeconds = 5.0;
constexpr double kRobustnessSeconds = 120.0;
constexpr double kScaleSeconds = 60.0;
constexpr double kPhiFactor = 2.0;
constexpr double kRecoveryFloor = 0.8;
constexpr double kGapRatioCeiling = 0.5;
constexpr int kSeeds = 20;
constexpr int kBaselineTrials = 1000;
constexpr double kDampening = 5.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  if (std::isinf(v[n / 2])) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

// 1. Production counts equal the pairwise counter on 1000 random instances.
Outcome oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  std::size_t mismatches = 0;
  std::size_t entries = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t branches = 1 + rng() % 50;
    const auto table = testing::random_table(rng, branches, 1 + rng() % 8, 1 + rng() % 12, 0.25, 1);
    const auto sample = testing::every_product(table.product_count());
    if (top_dog_counts(table, sample) != testing::brute_force_counts(table, sample)) ++mismatches;
    for (ProductIndex p = 0; p < table.product_count(); ++p) entries += table.product(p).size();
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < kOracleSeconds,
          fmt("%zu mismatching instances of 1000 (%zu entries), %.2f s (limit %.0f s)", mismatches,
              entries, elapsed, kOracleSeconds)};
}

// 2. Datasets where every carrier of a product shares one stock-out day.
Outcome tie_saturation() {
  std::mt19937_64 rng(2);
  std::size_t non_neutral = 0;
  std::size_t values = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t branches = 3 + rng() % 30;
    const std::size_t products = 1 + rng() % 40;
    std::vector<SupplyEntry> supply;
    std::vector<Transaction> sales;
    for (ProductIndex p = 0; p < products; ++p) {
      const bool censored = rng() % 4 == 0;
      const int day = 1 + static_cast<int>(rng() % 60);
      for (BranchIndex b = 0; b < branches; ++b) {
        if (rng() % 5 == 0) {
          supply.push_back({p, b, 0});  // listed but not carried
          continue;
        }
        const std::int64_t stock = 1 + static_cast<std::int64_t>(rng() % 6);
        supply.push_back({p, b, stock});
        if (censored) {
          if (stock > 1) sales.push_back({p, b, 1 + static_cast<int>(rng() % 60), stock - 1});
        } else {
          if (stock > 1 && day > 1) sales.push_back({p, b, 1 + static_cast<int>(rng() % (day - 1)), 1});
          sales.push_back({p, b, day, stock - (stock > 1 && day > 1 ? 1 : 0)});
        }
      }
    }
    std::vector<std::string> branch_ids(branches);
    std::vector<std::string> product_ids(products);
    for (std::size_t b = 0; b < branches; ++b) branch_ids[b] = fmt("b%03zu", b);
    for (std::size_t p = 0; p < products; ++p) product_ids[p] = fmt("p%03zu", p);
    const auto ds = Dataset::from_parts(branch_ids, product_ids, supply, sales, 60);
    if (!validate_dataset(ds).ok()) return {false, fmt("generated dataset %d is invalid", trial)};
    const auto reports = tdi_report(compute_stockout_days(ds), partition_products(products, trial),
                                    kDampening);
    for (const auto& report : reports) {
      for (double v : report.values()) {
        ++values;
        if (v != 1.0) ++non_neutral;
      }
    }
  }
  return {non_neutral == 0, fmt("%zu of %zu TDI values differ from 1 over 100 datasets",
                                non_neutral, values)};
}

// 3. A strictly increasing day map leaves (W, L) unchanged.
Outcome monotone_time_invariance() {
  std::mt19937_64 rng(3);
  int changed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto table = testing::random_table(rng, 1 + rng() % 60, 1 + rng() % 60, 60, 0.15);
    std::vector<int> map(61, 0);
    for (int d = 1; d <= 60; ++d) map[d] = map[d - 1] + 1 + static_cast<int>(rng() % 7);
    std::vector<std::vector<StockOutEntry>> mapped(table.product_count());
    for (ProductIndex p = 0; p < table.product_count(); ++p) {
      for (auto e : table.product(p)) {
        if (!e.theta.is_censored()) e.theta = StockOutDay::sold_out(map[e.theta.day()]);
        mapped[p].push_back(e);
      }
    }
    const auto sample = testing::every_product(table.product_count());
    if (top_dog_counts(StockOutTable(table.branch_count(), mapped), sample) !=
        top_dog_counts(table, sample)) {
      ++changed;
    }
  }
  return {changed == 0, fmt("%d of 100 tables changed under the day map", changed)};
}

DemandEstimate random_estimate(std::mt19937_64& rng, std::size_t n, int day) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DemandEstimate e{day, "random", std::vector<double>(n)};
  for (auto& x : e.shares) x = rng() % 5 == 0 ? 0.0 : u(rng);
  e.shares[rng() % n] += 1e-3;
  const double total = std::accumulate(e.shares.begin(), e.shares.end(), 0.0);
  for (auto& x : e.shares) x /= total;
  return e;
}

// 4. Discrepancy is a bounded metric.
Outcome metric_laws() {
  std::mt19937_64 rng(4);
  int violations = 0;
  double worst_triangle = -2.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 25;
    const int day = 1 + static_cast<int>(rng() % 60);
    const auto x = random_estimate(rng, n, day);
    const auto y = random_estimate(rng, n, day);
    const auto z = random_estimate(rng, n, day);
    const double xy = discrepancy(x, y);
    const double slack = discrepancy(x, z) - xy - discrepancy(y, z);
    worst_triangle = std::max(worst_triangle, slack);
    const bool ok = xy >= 0.0 && xy <= 2.0 + kMetricTolerance &&
                    std::abs(discrepancy(x, x)) <= kMetricTolerance &&
                    std::abs(xy - discrepancy(y, x)) <= kMetricTolerance &&
                    slack <= kMetricTolerance;
    if (!ok) ++violations;
  }
  return {violations == 0, fmt("%d of 1000 triples violate a law, max triangle slack %.3g (tol %.0e)",
                               violations, worst_triangle, kMetricTolerance)};
}

bool complementary(const ProductSet& a, const ProductSet& b, std::size_t n) {
  ProductSet joined;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(joined));
  ProductSet common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return common.empty() && joined == testing::every_product(n);
}

// 5. Complementary pairs and D7 = P.
Outcome partition_laws() {
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t n = 1 + (seed * 37) % 2000;
    const auto part = partition_products(n, seed);
    const bool ok = complementary(part.sample(1), part.sample(2), n) &&
                    complementary(part.sample(3), part.sample(4), n) &&
                    complementary(part.sample(5), part.sample(6), n) &&
                    part.sample(7) == testing::every_product(n);
    if (!ok) ++failures;
  }
  return {failures == 0, fmt("%d of 100 seeds break a partition law", failures)};
}

struct MarketRun {
  double tdi_score = 0.0;
  double phi_score = 0.0;
};

// TDI and phi_5 robustness scores of one simulated default market.
MarketRun run_default_market(std::uint64_t seed) {
  const auto market = default_market(200, 400, seed);
  const auto items = allocate_items(market.supply_plan(), 400, market.supply, seed);
  const auto ds = simulate(market.config, items);
  const auto part = partition_products(ds.product_count(), seed);
  const auto reports = tdi_report(compute_stockout_days(ds), part, kDampening);
  MarketRun run;
  run.tdi_score = robustness_score(relative_distribution(reports));
  run.phi_score = robustness_score(relative_distribution(phi_sample_values(ds, part, 5)));
  return run;
}

std::vector<MarketRun> g_market_runs;

// 6. Simulated TDI matrices are more stable than random matrices.
Outcome robustness_reproduction() {
  const auto start = Clock::now();
  std::vector<double> random_scores;
  for (int k = 0; k < kBaselineTrials; ++k) {
    random_scores.push_back(robustness_score(baseline_matrices(200, 100000 + k).random));
  }
  std::sort(random_scores.begin(), random_scores.end());
  const double p5 = random_scores[kBaselineTrials / 20];
  const double deterministic = robustness_score(baseline_matrices(200, 7).deterministic);

  g_market_runs.clear();
  double worst = 0.0;
  int above = 0;
  for (int s = 1; s <= kSeeds; ++s) {
    g_market_runs.push_back(run_default_market(s));
    worst = std::max(worst, g_market_runs.back().tdi_score);
    if (!(g_market_runs.back().tdi_score < p5)) ++above;
  }
  const double elapsed = seconds_since(start);
  std::vector<double> tdi_scores;
  for (const auto& r : g_market_runs) tdi_scores.push_back(r.tdi_score);
  return {above == 0 && deterministic == 0.0 && elapsed < kRobustnessSeconds,
          fmt("TDI score median %.4f max %.4f vs random P5 %.4f (%d of %d seeds not below); "
              "deterministic %.3g; %.1f s (limit %.0f s)",
              median(tdi_scores), worst, p5, above, kSeeds, deterministic, elapsed,
              kRobustnessSeconds)};
}

// 7. The naive estimator at day 5 is markedly less stable.
Outcome naive_inferiority() {
  if (g_market_runs.empty()) return {false, "no market runs"};
  std::vector<double> tdi_scores;
  std::vector<double> phi_scores;
  for (const auto& r : g_market_runs) {
    tdi_scores.push_back(r.tdi_score);
    phi_scores.push_back(r.phi_score);
  }
  const double t = median(tdi_scores);
  const double p = median(phi_scores);
  const auto infinite = std::count_if(phi_scores.begin(), phi_scores.end(),
                                      [](double x) { return std::isinf(x); });
  return {p >= kPhiFactor * t,
          fmt("median phi_5 score %.4f vs %.1f x median TDI score %.4f = %.4f (%ld of %d seeds "
              "infinite: a branch without early sales)",
              p, kPhiFactor, t, kPhiFactor * t, static_cast<long>(infinite), kSeeds)};
}

// 8. TDI ranks the true undersupply ratio.
Outcome recovery() {
  std::vector<double> scores;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto market = default_market(200, 400, s, kStrongMisSupply);
    const auto items = allocate_items(market.supply_plan(), 400, market.supply, s);
    const auto ds = simulate(market.config, items);
    const auto reports = tdi_report(compute_stockout_days(ds),
                                    partition_products(ds.product_count(), s), kDampening);
    scores.push_back(evaluate_recovery(reports[6].values(), market.config, items));
  }
  const double med = median(scores);
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
  return {med >= kRecoveryFloor,
          fmt("Spearman median %.3f mean %.3f min %.3f (floor %.2f)", med, mean,
              *std::min_element(scores.begin(), scores.end()), kRecoveryFloor)};
}

// 9. The loop closes the gap; zero increments keep it fixed.
Outcome closed_loop_improvement() {
  std::vector<double> ratios;
  bool identity = true;
  for (int s = 1; s <= kSeeds; ++s) {
    const auto market = default_market(200, 400, s, kHalfGroupShort);
    const auto trajectory = closed_loop(market.config, market.supply_plan(), market.loop, 10);
    ratios.push_back(trajectory.rounds.back().gap / trajectory.initial_gap);
  }
  for (int s = 1; s <= 3; ++s) {
    auto market = default_market(200, 400, s, kHalfGroupShort);
    market.loop.fixed = ClusterConfig{{0.9, 1.1}, {0.0, 0.0, 0.0}};
    const auto initial = market.supply_plan();
    const auto trajectory = closed_loop(market.config, initial, market.loop, 10);
    for (const auto& r : trajectory.rounds) {
      identity = identity && r.gap == trajectory.initial_gap && r.plan.shares == initial.shares;
    }
  }
  const double med = median(ratios);
  return {med <= kGapRatioCeiling && identity,
          fmt("median g10/g0 %.3f (ceiling %.2f), max %.3f; zero-increment gap constant: %s", med,
              kGapRatioCeiling, *std::max_element(ratios.begin(), ratios.end()),
              identity ? "yes" : "no")};
}

// 10. Update formula identity, normalization and the hand-computed case.
Outcome update_formula() {
  bool ok = true;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_sum = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> w(n);
    for (auto& x : w) x = u(rng);
    const auto plan = SupplyPlan::from_weights(w, "random");
    std::vector<int> assignment(n);
    for (auto& j : assignment) j = 1 + static_cast<int>(rng() % 3);
    const ClusterConfig zero{{0.8, 1.25}, {0.0, 0.0, 0.0}};
    ok = ok && update_supply(plan, assignment, zero).shares == plan.shares;
    const double floor = *std::min_element(plan.shares.begin(), plan.shares.end());
    const ClusterConfig step{{0.8, 1.25}, {-floor * u(rng), 0.0, u(rng) / n}};
    const auto next = update_supply(plan, assignment, step);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(next.shares.begin(), next.shares.end(), 0.0) - 1.0));
  }
  const auto hand = update_supply(SupplyPlan{{0.6, 0.4}, "hand"}, std::vector<int>{2, 1},
                                  ClusterConfig{{1.0}, {0.0, 0.1}});
  const double err = std::max(std::abs(hand.shares[0] - 0.7 / 1.1), std::abs(hand.shares[1] - 0.4 / 1.1));
  ok = ok && worst_sum <= kSumTolerance && err <= kHandTolerance;
  return {ok, fmt("zero increments exact over 1000 plans; max |sum-1| %.2g (tol %.0e); "
                  "hand example error %.2g (tol %.0e)",
                  worst_sum, kSumTolerance, err, kHandTolerance)};
}

// 11. 1000 branches x 5000 products from CSV to robustness score.
Outcome scale() {
  namespace fs = std::filesystem;
  constexpr std::size_t branches = 1000;
  constexpr std::size_t products = 5000;
  const auto dir = fs::temp_directory_path() / "topdog_acceptance_scale";
  fs::create_directories(dir);
  {
    const auto market = default_market(branches, products, 11);
    const auto items = allocate_items(market.supply_plan(), products, market.supply, 11);
    const auto ds = simulate(market.config, items);
    std::ofstream sales(dir / "sales.csv");
    std::ofstream supply(dir / "supply.csv");
    write_sales_csv(sales, ds);
    write_supply_csv(supply, ds);
  }
  const auto bytes = fs::file_size(dir / "sales.csv") + fs::file_size(dir / "supply.csv");

  struct Result {
    double seconds;
    double score;
    std::vector<double> d7;
  };
  auto pipeline = [&] {
    const auto start = Clock::now();
    const auto ds = load_dataset(dir / "sales.csv", dir / "supply.csv");
    const auto table = compute_stockout_days(ds);
    const auto reports = tdi_report(table, partition_products(ds.product_count(), 11), kDampening);
    const double score = robustness_score(relative_distribution(reports));
    return Result{seconds_since(start), score, reports[6].values()};
  };
  const auto first = pipeline();
  const auto second = pipeline();
  fs::remove_all(dir);
  const bool deterministic = first.score == second.score && first.d7 == second.d7;
  const double slowest = std::max(first.seconds, second.seconds);
  return {slowest < kScaleSeconds && deterministic,
          fmt("%.1f MB of CSV, pipeline %.1f s and %.1f s (limit %.0f s), score %.4f, "
              "repeat identical: %s",
              bytes / 1e6, first.seconds, second.seconds, kScaleSeconds, first.score,
              deterministic ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence of top-dog counts", oracle_equivalence},
      {"tie saturation gives neutral TDI", tie_saturation},
      {"monotone-time invariance", monotone_time_invariance},
      {"discrepancy metric laws", metric_laws},
      {"sample partition laws", partition_laws},
      {"robustness below random baseline", robustness_reproduction},
      {"naive estimator inferiority", naive_inferiority},
      {"recovery of undersupply", recovery},
      {"closed-loop improvement", closed_loop_improvement},
      {"update formula identity and normalization", update_formula},
      {"scale 1000 x 5000", scale},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
