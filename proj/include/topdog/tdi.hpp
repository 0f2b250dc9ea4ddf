#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topdog/sampling.hpp"
#include "topdog/stockout.hpp"

namespace topdog {

inline constexpr double kDefaultDampening = 5.0;

// Top-Dog-Count W and Flop-Dog-Count L of one branch.
struct DogCounts {
  std::int64_t wins = 0;
  std::int64_t losses = 0;

  friend bool operator==(const DogCounts&, const DogCounts&) = default;
};

// For every product in `sample` and every branch b carrying it, b wins a point
// when at most |B_p|/3 branches stocked out no later than b, and loses one
// when at most |B_p|/3 branches stocked out no earlier. Ties count on both
// sides, so the thresholds apply to set cardinalities rather than positions.
std::vector<DogCounts> top_dog_counts(const StockOutTable& table, const ProductSet& sample);

// (W + C) / (L + C). Throws Error{NonPositiveDampening} unless C > 0.
double tdi(std::int64_t wins, std::int64_t losses, double dampening);

struct BranchTdi {
  std::int64_t wins = 0;
  std::int64_t losses = 0;
  double tdi = 1.0;
};

struct TdiReport {
  std::string sample;
  double dampening = kDefaultDampening;
  std::vector<BranchTdi> branches;  // indexed by branch

  std::vector<double> values() const;
};

TdiReport make_tdi_report(std::span<const DogCounts> counts, double dampening, std::string sample);

// One report per sample D1..D7 of the partition.
std::array<TdiReport, kSampleCount> tdi_report(const StockOutTable& table,
                                               const SamplePartition& partition, double dampening);

// Row-normalized values: entry(b, i) = value(b, D_i) / sum_j value(b, D_j).
// Rows are ordered by descending value on D7, ties by branch index.
struct RelativeDistributionMatrix {
  std::vector<BranchIndex> branch;  // branch shown in each row
  std::vector<std::array<double, kSampleCount>> rows;

  std::size_t size() const noexcept { return rows.size(); }
};

// values[b][i] is the raw measurement of branch b on sample D_{i+1}; must be
// nonnegative.
RelativeDistributionMatrix relative_distribution(
    std::span<const std::array<double, kSampleCount>> values);
RelativeDistributionMatrix relative_distribution(std::span<const TdiReport> reports);

// Largest coefficient of variation (population) across branches of
// entry(b,i)/entry(b,j), over all sample pairs i < j. Zero when every branch
// shows the same ratio for every pair; +inf when a ratio is undefined because
// of a zero entry. Throws Error{TooFewBranches} for fewer than 2 rows.
double robustness_score(const RelativeDistributionMatrix& matrix);

// phi_{b,d}(D_i) for the seven samples, as input to relative_distribution().
// Throws Error{NoSales} when a sample sold nothing through `day`.
std::vector<std::array<double, kSampleCount>> phi_sample_values(const Dataset& dataset,
                                                                const SamplePartition& partition,
                                                                int day);

struct BaselineMatrices {
  RelativeDistributionMatrix deterministic;  // value(b, D_i) = c_b
  RelativeDistributionMatrix random;         // i.i.d. uniform on [0.5, 1.5]
};

BaselineMatrices baseline_matrices(std::size_t branch_count, std::uint64_t seed);

struct OccurringTdis {
  std::string sample;
  std::vector<double> sorted;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;

  double spread() const noexcept { return max - min; }
};

std::vector<OccurringTdis> occurring_tdis(std::span<const TdiReport> reports);

// Linear-interpolation quantile of ascending data, q in [0,1].
double quantile_sorted(std::span<const double> sorted, double q);

// CSV `branch_id,sample,W,L,C,TDI`; several reports may share one stream.
void write_tdi_report_header(std::ostream& out);
void write_tdi_report_rows(std::ostream& out, const TdiReport& report,
                           std::span<const std::string> branch_ids);

struct TdiCsvRow {
  std::string branch_id;
  std::string sample;
  std::int64_t wins = 0;
  std::int64_t losses = 0;
  double dampening = 0.0;
  double tdi = 0.0;
};

std::vector<TdiCsvRow> read_tdi_report_csv(std::istream& in);

// CSV `branch_id,rel_D1,...,rel_D7`.
void write_matrix_csv(std::ostream& out, const RelativeDistributionMatrix& matrix,
                      std::span<const std::string> branch_ids);

// CSV `sample,rank,tdi` with values ascending per sample, and the summary
// `sample,min,q1,median,q3,max,spread`.
void write_occurring_csv(std::ostream& out, std::span<const OccurringTdis> occurring);
void write_occurring_summary_csv(std::ostream& out, std::span<const OccurringTdis> occurring);

}  // namespace topdog
