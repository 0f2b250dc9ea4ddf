#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "topdog/error.hpp"
#include "topdog/rank_stats.hpp"
#include "topdog/simulator.hpp"
#include "topdog/stockout.hpp"

namespace topdog {
namespace {

// Reference values from scipy.stats.spearmanr.
TEST(Spearman, MatchesReference) {
  const std::vector<double> x{17, 86, 60, 77, 47, 3, 70, 47, 88, 92};
  const std::vector<double> y{70, 29, 85, 61, 80, 34, 60, 31, 73, 66};
  EXPECT_NEAR(spearman(x, y), 0.024316221747202587, 1e-14);
  const std::vector<double> tx{1, 1, 2, 2, 3, 3};
  const std::vector<double> ty{0.5, 0.7, 0.2, 0.9, 1.5, 1.1};
  EXPECT_NEAR(spearman(tx, ty), 0.7171371656006363, 1e-14);
  EXPECT_EQ(average_ranks(tx), (std::vector<double>{1.5, 1.5, 3.5, 3.5, 5.5, 5.5}));
  EXPECT_TRUE(std::isnan(spearman(std::vector<double>(6, 1.0), ty)));
}

SimConfig small_config(std::size_t branches, std::size_t products, std::uint64_t seed) {
  SimConfig config;
  config.branch_weights = random_weights(branches, 0.5, 2.0, seed);
  config.product_count = products;
  config.seed = seed;
  return config;
}

TEST(Simulate, NoItemsNoSales) {
  const auto config = small_config(5, 10, 1);
  const auto ds = simulate(config, ItemMatrix(5, 10));
  EXPECT_TRUE(ds.transactions().empty());
  EXPECT_EQ(ds.branch_count(), 5U);
}

TEST(Simulate, HugeRateSellsOutOnDayOne) {
  auto config = small_config(6, 20, 2);
  config.base_rate = 1000.0;
  ItemMatrix items(6, 20);
  for (ProductIndex p = 0; p < 20; ++p) {
    for (BranchIndex b = 0; b < 6; ++b) items.at(p, b) = 1;
  }
  const auto ds = simulate(config, items);
  const auto table = compute_stockout_days(ds);
  for (ProductIndex p = 0; p < 20; ++p) {
    for (const auto& e : table.product(p)) EXPECT_EQ(e.theta, StockOutDay::sold_out(1));
  }
  const auto reports = tdi_report(table, partition_products(20, 1), 5.0);
  for (const auto& r : reports) {
    for (double v : r.values()) EXPECT_EQ(v, 1.0);
  }
}

TEST(Simulate, NeverOversellsAndIsDeterministic) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto scenario = default_market(30, 60, seed);
    const auto items = allocate_items(scenario.supply_plan(), 60, scenario.supply, seed);
    const auto ds = simulate(scenario.config, items);
    EXPECT_TRUE(validate_dataset(ds).ok());
    for (ProductIndex p = 0; p < 60; ++p) {
      std::vector<std::int64_t> sold(30, 0);
      for (const auto& t : ds.sales_of_product(p)) sold[t.branch] += t.quantity;
      for (BranchIndex b = 0; b < 30; ++b) EXPECT_LE(sold[b], items.at(p, b));
    }
    EXPECT_EQ(simulate(scenario.config, items), ds);
  }
}

TEST(Simulate, MeanSupplyPerPairInRange) {
  const auto scenario = default_market();
  const auto items = allocate_items(scenario.supply_plan(), 400, scenario.supply, 1);
  const auto totals = items.branch_totals();
  const double mean = std::accumulate(totals.begin(), totals.end(), 0.0) / (200.0 * 400.0);
  EXPECT_GE(mean, 1.0);
  EXPECT_LE(mean, 6.0);
}

TEST(Simulate, MarkdownSchedule) {
  SimConfig config;
  config.markdown = {{7, 4.0}, {21, 8.0}};
  EXPECT_EQ(config.markdown_multiplier(7), 1.0);
  EXPECT_EQ(config.markdown_multiplier(8), 4.0);
  EXPECT_EQ(config.markdown_multiplier(22), 8.0);
}

TEST(SimConfig, Validation) {
  auto config = small_config(4, 4, 1);
  EXPECT_NO_THROW(config.validate());
  auto bad = config;
  bad.base_rate = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = config;
  bad.markdown = {{7, 4.0}, {21, 2.0}};
  EXPECT_THROW(bad.validate(), Error);
  bad = config;
  bad.branch_weights[0] = -bad.branch_weights[0];
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Recovery, PerfectAndReversed) {
  auto config = small_config(5, 1, 1);
  const auto plan = SupplyPlan::from_weights(std::vector<double>(5, 1.0), "flat");
  std::vector<double> ratio(5);
  for (std::size_t b = 0; b < 5; ++b) ratio[b] = config.branch_weights[b] / plan.shares[b];
  EXPECT_NEAR(evaluate_recovery(ratio, config, plan), 1.0, 1e-12);
  std::vector<double> reversed(5);
  for (std::size_t b = 0; b < 5; ++b) reversed[b] = -ratio[b] + 100.0;
  EXPECT_NEAR(evaluate_recovery(reversed, config, plan), -1.0, 1e-12);
  std::vector<double> rescaled(5);
  for (std::size_t b = 0; b < 5; ++b) rescaled[b] = std::exp(3.0 * ratio[b]);
  EXPECT_EQ(evaluate_recovery(rescaled, config, plan), evaluate_recovery(ratio, config, plan));

  auto tiny = small_config(2, 1, 1);
  try {
    evaluate_recovery(std::vector<double>{1, 2}, tiny, SupplyPlan{{0.5, 0.5}, ""});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewBranches);
  }
}

TEST(Recovery, HalvedGroupTakesTopDecile) {
  // supply proportional to w except every tenth branch at half its share
  const std::size_t n = 200;
  int hits = 0;
  int trials = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto scenario = default_market(n, 400, seed, {1.0});
    for (std::size_t b = 0; b < n; b += 10) scenario.supply_factors[b] = 0.5;
    const auto items = allocate_items(scenario.supply_plan(), 400, scenario.supply, seed);
    const auto ds = simulate(scenario.config, items);
    const auto report = tdi_report(compute_stockout_days(ds), partition_products(400, seed), 5.0)[6];
    auto values = report.values();
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double cut = sorted[n / 10 - 1];
    for (std::size_t b = 0; b < n; b += 10) {
      hits += values[b] >= cut ? 1 : 0;
      ++trials;
    }
  }
  EXPECT_GE(static_cast<double>(hits) / trials, 0.8);
}

TEST(Occurring, MisSuppliedSpreadExceedsHalf) {
  const auto scenario = default_market(200, 400, 3, kStrongMisSupply);
  const auto items = allocate_items(scenario.supply_plan(), 400, scenario.supply, 3);
  const auto reports =
      tdi_report(compute_stockout_days(simulate(scenario.config, items)), partition_products(400, 3), 5.0);
  for (const auto& occ : occurring_tdis(reports)) EXPECT_GT(occ.spread(), 0.5) << occ.sample;
}

TEST(ClosedLoop, ZeroIncrementsKeepPlanAndGap) {
  auto scenario = default_market(40, 80, 2, kHalfGroupShort);
  scenario.loop.fixed = ClusterConfig{{0.9, 1.1}, {0.0, 0.0, 0.0}};
  const auto initial = scenario.supply_plan();
  const auto trajectory = closed_loop(scenario.config, initial, scenario.loop, 4);
  ASSERT_EQ(trajectory.rounds.size(), 4U);
  for (const auto& r : trajectory.rounds) {
    EXPECT_EQ(r.plan.shares, initial.shares);
    EXPECT_EQ(r.gap, trajectory.initial_gap);
  }
}

TEST(ClosedLoop, CorrectPlanStaysStable) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto scenario = default_market(200, 400, seed, {1.0});
    const auto trajectory = closed_loop(scenario.config, scenario.supply_plan(), scenario.loop, 5);
    const double first = trajectory.rounds.front().gap;
    for (const auto& r : trajectory.rounds) EXPECT_LE(r.gap, 2.0 * first) << "seed " << seed;
  }
}

TEST(ClosedLoop, DeterministicAndCsv) {
  const auto scenario = default_market(30, 60, 4, kHalfGroupShort);
  const auto a = closed_loop(scenario.config, scenario.supply_plan(), scenario.loop, 3);
  const auto b = closed_loop(scenario.config, scenario.supply_plan(), scenario.loop, 3);
  std::ostringstream out_a;
  std::ostringstream out_b;
  write_trajectory_csv(out_a, a);
  write_trajectory_csv(out_b, b);
  EXPECT_EQ(out_a.str(), out_b.str());
  EXPECT_EQ(out_a.str().substr(0, out_a.str().find('\n')),
            "round,gap,score,gap_ratio,tdi_min,tdi_max,updated");
  for (const auto& r : a.rounds) {
    EXPECT_GE(r.gap, 0.0);
    EXPECT_LE(r.gap, 2.0);
  }
}

TEST(Scenario, JsonRoundTrip) {
  const auto scenario = default_market(12, 30, 9, kStrongMisSupply);
  std::ostringstream out;
  write_scenario(out, scenario);
  std::istringstream in(out.str());
  const auto read = read_scenario(in);
  EXPECT_EQ(read.config.branch_weights, scenario.config.branch_weights);
  EXPECT_EQ(read.supply_factors, scenario.supply_factors);
  EXPECT_EQ(read.config.product_count, 30U);
  EXPECT_EQ(read.rounds, scenario.rounds);
  std::istringstream bad(R"({"base_rate": -1})");
  EXPECT_THROW(read_scenario(bad), Error);
}

}  // namespace
}  // namespace topdog
