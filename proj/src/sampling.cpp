#include "topdog/sampling.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "topdog/csv.hpp"
#include "topdog/error.hpp"

namespace topdog {

std::string sample_name(int sample) { return "D" + std::to_string(sample); }

SamplePartition partition_from_labels(std::vector<std::uint8_t> labels, std::uint64_t seed) {
  SamplePartition partition;
  partition.seed = seed;
  for (ProductIndex p = 0; p < labels.size(); ++p) {
    for (int i = 1; i <= kSampleCount; ++i) {
      if (sample_contains_label(i, labels[p])) partition.samples[i - 1].push_back(p);
    }
  }
  partition.labels = std::move(labels);
  return partition;
}

SamplePartition partition_products(std::size_t product_count, std::uint64_t seed) {
  if (product_count == 0) throw Error(ErrorCode::EmptyUniverse, "no products to partition");
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> labels(product_count);
  // Top two bits of a 64-bit draw: exactly uniform over {0,1,2,3}.
  for (auto& r : labels) r = static_cast<std::uint8_t>(1 + (rng() >> 62));
  return partition_from_labels(std::move(labels), seed);
}

ProductSet all_products(std::size_t product_count) {
  ProductSet all(product_count);
  std::iota(all.begin(), all.end(), ProductIndex{0});
  return all;
}

std::vector<std::vector<std::int64_t>> cumulative_branch_sales(const Dataset& ds,
                                                               const ProductSet& sample, int d_max) {
  std::vector<std::vector<std::int64_t>> by_day(std::max(d_max, 0),
                                                std::vector<std::int64_t>(ds.branch_count(), 0));
  for (const ProductIndex p : sample) {
    for (const auto& t : ds.sales_of_product(p)) {
      if (t.day >= 1 && t.day <= d_max) by_day[t.day - 1][t.branch] += t.quantity;
    }
  }
  for (std::size_t d = 1; d < by_day.size(); ++d) {
    for (std::size_t b = 0; b < ds.branch_count(); ++b) by_day[d][b] += by_day[d - 1][b];
  }
  return by_day;
}

namespace {

std::optional<std::vector<double>> normalize(std::span<const std::int64_t> counts) {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (total <= 0) return std::nullopt;
  std::vector<double> shares(counts.size());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    shares[b] = static_cast<double>(counts[b]) / static_cast<double>(total);
  }
  return shares;
}

}  // namespace

DemandEstimate phi(const Dataset& ds, const ProductSet& sample, int day, std::string sample_label) {
  std::vector<std::int64_t> sold(ds.branch_count(), 0);
  for (const ProductIndex p : sample) {
    for (const auto& t : ds.sales_of_product(p)) {
      if (t.day >= 1 && t.day <= day) sold[t.branch] += t.quantity;
    }
  }
  auto shares = normalize(sold);
  if (!shares) {
    throw Error(ErrorCode::NoSales, "no items of sample " + sample_label + " sold through day " +
                                        std::to_string(day));
  }
  return {day, std::move(sample_label), std::move(*shares)};
}

double discrepancy(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::BranchSetMismatch, "estimates cover " + std::to_string(a.size()) +
                                                  " and " + std::to_string(b.size()) + " branches");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total;
}

double discrepancy(const DemandEstimate& a, const DemandEstimate& b) {
  if (a.day != b.day) {
    throw Error(ErrorCode::BranchSetMismatch, "estimates taken on days " + std::to_string(a.day) +
                                                  " and " + std::to_string(b.day));
  }
  return discrepancy(a.shares, b.shares);
}

std::vector<double> supply_shares(const Dataset& ds, const ProductSet& sample) {
  std::vector<std::int64_t> supplied(ds.branch_count(), 0);
  for (const ProductIndex p : sample) {
    for (const auto& e : ds.supply_of_product(p)) supplied[e.branch] += e.quantity;
  }
  auto shares = normalize(supplied);
  if (!shares) throw Error(ErrorCode::ZeroSupply, "sample has no supply");
  return std::move(*shares);
}

double supply_discrepancy(const Dataset& ds, const ProductSet& sample, int day) {
  const auto estimate = phi(ds, sample, day);
  return discrepancy(estimate.shares, supply_shares(ds, sample));
}

std::vector<DiscrepancyRow> discrepancy_curve(const Dataset& ds, const SamplePartition& partition,
                                              int d_max) {
  if (d_max > ds.horizon()) {
    throw Error(ErrorCode::InvalidConfig, "day range " + std::to_string(d_max) +
                                              " exceeds horizon " + std::to_string(ds.horizon()));
  }
  const auto& d1 = partition.sample(1);
  const auto& d2 = partition.sample(2);
  const auto& d7 = partition.sample(7);
  const auto sales1 = cumulative_branch_sales(ds, d1, d_max);
  const auto sales2 = cumulative_branch_sales(ds, d2, d_max);
  const auto sales7 = cumulative_branch_sales(ds, d7, d_max);

  auto shares_or_none = [&](const ProductSet& sample) -> std::optional<std::vector<double>> {
    try {
      return supply_shares(ds, sample);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  const auto supply1 = shares_or_none(d1);
  const auto supply2 = shares_or_none(d2);
  const auto supply7 = shares_or_none(d7);

  std::vector<DiscrepancyRow> rows;
  for (int d = 1; d <= d_max; ++d) {
    const auto phi1 = normalize(sales1[d - 1]);
    const auto phi2 = normalize(sales2[d - 1]);
    const auto phi7 = normalize(sales7[d - 1]);
    DiscrepancyRow row{d, {}, {}, {}, {}};
    if (phi1 && phi2) row.delta_samples = discrepancy(*phi1, *phi2);
    if (phi1 && supply1) row.delta_supply_d1 = discrepancy(*phi1, *supply1);
    if (phi2 && supply2) row.delta_supply_d2 = discrepancy(*phi2, *supply2);
    if (phi7 && supply7) row.delta_supply_all = discrepancy(*phi7, *supply7);
    if (row.delta_samples || row.delta_supply_d1 || row.delta_supply_d2 || row.delta_supply_all) {
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<DiscrepancyRow> discrepancy_curve(const Dataset& ds, std::uint64_t seed, int d_max) {
  return discrepancy_curve(ds, partition_products(ds.product_count(), seed), d_max);
}

void write_discrepancy_csv(std::ostream& out, std::span<const DiscrepancyRow> rows) {
  auto cell = [&](const std::optional<double>& v) {
    if (v) out << csv::format_double(*v);
  };
  out << "day,delta_samples,delta_supply_D1,delta_supply_D2,delta_supply_D7\n";
  for (const auto& row : rows) {
    out << row.day << ',';
    cell(row.delta_samples);
    out << ',';
    cell(row.delta_supply_d1);
    out << ',';
    cell(row.delta_supply_d2);
    out << ',';
    cell(row.delta_supply_all);
    out << '\n';
  }
}

}  // namespace topdog
