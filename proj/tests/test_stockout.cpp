#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "topdog/stockout.hpp"

namespace topdog {
namespace {

Dataset single_pair(std::int64_t supply, std::vector<SalesRecord> sales) {
  const std::vector<SupplyRecord> s{{"p1", "b1", supply}};
  return Dataset::from_records(s, sales, 60);
}

TEST(Stockout, ThirdItemOnDayFour) {
  const auto table = compute_stockout_days(
      single_pair(3, {{"p1", "b1", 1, 1}, {"p1", "b1", 2, 1}, {"p1", "b1", 4, 1}}));
  EXPECT_EQ(table.theta(0, 0), StockOutDay::sold_out(4));
}

TEST(Stockout, SingleTransaction) {
  const auto table = compute_stockout_days(single_pair(2, {{"p1", "b1", 1, 2}}));
  EXPECT_EQ(table.theta(0, 0), StockOutDay::sold_out(1));
}

TEST(Stockout, Censored) {
  const auto table = compute_stockout_days(single_pair(3, {{"p1", "b1", 5, 2}}));
  ASSERT_TRUE(table.theta(0, 0));
  EXPECT_TRUE(table.theta(0, 0)->is_censored());
}

TEST(Stockout, Ordering) {
  EXPECT_LT(StockOutDay::sold_out(1), StockOutDay::sold_out(2));
  EXPECT_LT(StockOutDay::sold_out(60), StockOutDay::censored());
  EXPECT_EQ(StockOutDay::censored(), StockOutDay::censored());
  EXPECT_LT(StockOutDay::censored(0.2), StockOutDay::censored(0.5));
}

TEST(Stockout, ZeroSupplyPairsAreAbsent) {
  const std::vector<SupplyRecord> s{{"p1", "b1", 0}, {"p1", "b2", 1}};
  const auto table = compute_stockout_days(Dataset::from_records(s, {}, 60));
  EXPECT_FALSE(table.theta(0, 0));
  EXPECT_TRUE(table.theta(0, 1));
  EXPECT_EQ(table.product(0).size(), 1U);
  EXPECT_TRUE(table.carried_products(0).empty());
  EXPECT_EQ(table.carried_products(1), std::vector<ProductIndex>{0});
}

TEST(Stockout, RemainingFractionTiebreak) {
  const std::vector<SupplyRecord> s{{"p1", "b1", 4}, {"p1", "b2", 4}};
  const std::vector<SalesRecord> sales{{"p1", "b1", 3, 3}, {"p1", "b2", 3, 1}};
  const auto ds = Dataset::from_records(s, sales, 60);
  const auto shared = compute_stockout_days(ds);
  EXPECT_EQ(*shared.theta(0, 0), *shared.theta(0, 1));
  const auto ordered = compute_stockout_days(ds, CensoredTiebreak::RemainingFraction);
  EXPECT_LT(*ordered.theta(0, 0), *ordered.theta(0, 1));
}

TEST(Stockout, CsvDump) {
  const std::vector<SupplyRecord> s{{"p1", "b1", 1}, {"p1", "b2", 2}};
  const std::vector<SalesRecord> sales{{"p1", "b1", 7, 1}};
  const auto ds = Dataset::from_records(s, sales, 60);
  std::ostringstream out;
  write_stockout_csv(out, compute_stockout_days(ds), ds);
  EXPECT_EQ(out.str(), "product_id,branch_id,theta\np1,b1,7\np1,b2,CENSORED\n");
}

// Random single-product histories: definition check, monotonicity under an
// added sale, and invariance under transaction order.
TEST(Stockout, Properties) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::int64_t supply = 1 + static_cast<std::int64_t>(rng() % 6);
    std::vector<SalesRecord> sales;
    std::int64_t left = supply;
    while (left > 0 && rng() % 3 != 0) {
      const std::int64_t q = 1 + static_cast<std::int64_t>(rng() % left);
      sales.push_back({"p1", "b1", static_cast<int>(1 + rng() % 60), q});
      left -= q;
    }
    const auto theta = *compute_stockout_days(single_pair(supply, sales)).theta(0, 0);

    std::vector<std::int64_t> cumulative(61, 0);
    for (const auto& r : sales) cumulative[r.day] += r.quantity;
    for (int d = 1; d <= 60; ++d) cumulative[d] += cumulative[d - 1];
    if (theta.is_censored()) {
      EXPECT_LT(cumulative[60], supply);
    } else {
      EXPECT_EQ(cumulative[theta.day()], supply);
      EXPECT_LT(cumulative[theta.day() - 1], supply);
    }

    auto shuffled = sales;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(*compute_stockout_days(single_pair(supply, shuffled)).theta(0, 0), theta);

    if (left > 0) {
      auto more = sales;
      more.push_back({"p1", "b1", static_cast<int>(1 + rng() % 60), 1});
      EXPECT_LE(*compute_stockout_days(single_pair(supply, more)).theta(0, 0), theta);
    }
  }
}

}  // namespace
}  // namespace topdog
