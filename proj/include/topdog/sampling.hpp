#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topdog/core_model.hpp"

namespace topdog {

// Sorted, duplicate-free list of product indices.
using ProductSet = std::vector<ProductIndex>;

inline constexpr int kSampleCount = 7;

// Membership of a product with label r in sample D_i (i in 1..7):
//   D1 {1,2}  D2 {3,4}  D3 {1,3}  D4 {2,4}  D5 {3}  D6 {1,2,4}  D7 {1,2,3,4}
constexpr bool sample_contains_label(int sample, int label) noexcept {
  constexpr std::array<std::uint8_t, kSampleCount> masks = {
      0b0011, 0b1100, 0b0101, 0b1010, 0b0100, 0b1011, 0b1111};
  if (sample < 1 || sample > kSampleCount || label < 1 || label > 4) return false;
  return (masks[sample - 1] >> (label - 1)) & 1U;
}

std::string sample_name(int sample);

struct SamplePartition {
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> labels;  // r_p in {1,2,3,4}, indexed by product
  std::array<ProductSet, kSampleCount> samples;

  // 1-based, D1..D7.
  const ProductSet& sample(int i) const { return samples.at(i - 1); }
};

// Draws r_p uniformly from {1,2,3,4} with a seeded mt19937_64 and assembles
// D1..D7. Throws Error{EmptyUniverse} when there are no products.
SamplePartition partition_products(std::size_t product_count, std::uint64_t seed);
SamplePartition partition_from_labels(std::vector<std::uint8_t> labels, std::uint64_t seed = 0);

ProductSet all_products(std::size_t product_count);

struct DemandEstimate {
  int day = 0;
  std::string sample;
  std::vector<double> shares;  // phi_{b,d}, indexed by branch
};

// phi_{b,d}: share of the sample's items sold through day d that were sold in
// branch b. Throws Error{NoSales} when nothing was sold.
DemandEstimate phi(const Dataset& dataset, const ProductSet& sample, int day,
                   std::string sample_label = {});

// Items of `sample` sold per branch through each day 1..d_max; row d-1 holds
// the cumulative counts through day d.
std::vector<std::vector<std::int64_t>> cumulative_branch_sales(const Dataset& dataset,
                                                               const ProductSet& sample, int d_max);

// L1 distance between two share vectors over the same branch set; in [0,2]
// for distributions. Throws Error{BranchSetMismatch} on length mismatch.
double discrepancy(std::span<const double> a, std::span<const double> b);
// Also requires both estimates to be taken on the same day.
double discrepancy(const DemandEstimate& a, const DemandEstimate& b);

// Normalized supply s(b) of the sample's products. Throws Error{ZeroSupply}.
std::vector<double> supply_shares(const Dataset& dataset, const ProductSet& sample);

double supply_discrepancy(const Dataset& dataset, const ProductSet& sample, int day);

struct DiscrepancyRow {
  int day = 0;
  std::optional<double> delta_samples;    // delta_d(D1, D2)
  std::optional<double> delta_supply_d1;  // phi(D1) vs supply of D1
  std::optional<double> delta_supply_d2;
  std::optional<double> delta_supply_all;  // universe D7
};

// One row per day 1..d_max; days on which no value is defined are dropped and
// undefined entries stay empty.
std::vector<DiscrepancyRow> discrepancy_curve(const Dataset& dataset,
                                              const SamplePartition& partition, int d_max);
std::vector<DiscrepancyRow> discrepancy_curve(const Dataset& dataset, std::uint64_t seed, int d_max);

void write_discrepancy_csv(std::ostream& out, std::span<const DiscrepancyRow> rows);

}  // namespace topdog
