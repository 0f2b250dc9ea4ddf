#include "topdog/tdi.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "topdog/csv.hpp"
#include "topdog/error.hpp"

namespace topdog {

std::vector<DogCounts> top_dog_counts(const StockOutTable& table, const ProductSet& sample) {
  std::vector<DogCounts> counts(table.branch_count());
  std::vector<StockOutDay> sorted;
  for (const ProductIndex p : sample) {
    const auto entries = table.product(p);
    const auto n = static_cast<std::int64_t>(entries.size());
    // 3 * count <= n is the exact form of count <= n/3.
    if (n < 3) continue;
    sorted.clear();
    for (const auto& e : entries) sorted.push_back(e.theta);
    std::sort(sorted.begin(), sorted.end());
    for (const auto& e : entries) {
      const auto no_later = std::upper_bound(sorted.begin(), sorted.end(), e.theta) - sorted.begin();
      const auto no_earlier = sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), e.theta);
      if (3 * no_later <= n) ++counts[e.branch].wins;
      if (3 * no_earlier <= n) ++counts[e.branch].losses;
    }
  }
  return counts;
}

double tdi(std::int64_t wins, std::int64_t losses, double dampening) {
  if (!(dampening > 0.0) || !std::isfinite(dampening)) {
    throw Error(ErrorCode::NonPositiveDampening,
                "dampening must be a positive finite number, got " + csv::format_double(dampening));
  }
  return (static_cast<double>(wins) + dampening) / (static_cast<double>(losses) + dampening);
}

std::vector<double> TdiReport::values() const {
  std::vector<double> out;
  out.reserve(branches.size());
  for (const auto& b : branches) out.push_back(b.tdi);
  return out;
}

TdiReport make_tdi_report(std::span<const DogCounts> counts, double dampening, std::string sample) {
  TdiReport report{std::move(sample), dampening, {}};
  report.branches.reserve(counts.size());
  for (const auto& c : counts) report.branches.push_back({c.wins, c.losses, tdi(c.wins, c.losses, dampening)});
  return report;
}

std::array<TdiReport, kSampleCount> tdi_report(const StockOutTable& table,
                                               const SamplePartition& partition, double dampening) {
  // Validate before doing any counting work.
  tdi(0, 0, dampening);
  std::array<TdiReport, kSampleCount> reports;
  for (int i = 1; i <= kSampleCount; ++i) {
    reports[i - 1] = make_tdi_report(top_dog_counts(table, partition.sample(i)), dampening,
                                     sample_name(i));
  }
  return reports;
}

RelativeDistributionMatrix relative_distribution(
    std::span<const std::array<double, kSampleCount>> values) {
  std::vector<BranchIndex> order(values.size());
  std::iota(order.begin(), order.end(), BranchIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](BranchIndex a, BranchIndex b) {
    return values[a][kSampleCount - 1] > values[b][kSampleCount - 1];
  });
  RelativeDistributionMatrix matrix;
  matrix.branch = order;
  matrix.rows.reserve(order.size());
  for (const BranchIndex b : order) {
    const auto& row = values[b];
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    std::array<double, kSampleCount> rel{};
    for (int i = 0; i < kSampleCount; ++i) {
      rel[i] = total > 0.0 ? row[i] / total : std::numeric_limits<double>::quiet_NaN();
    }
    matrix.rows.push_back(rel);
  }
  return matrix;
}

RelativeDistributionMatrix relative_distribution(std::span<const TdiReport> reports) {
  if (reports.size() != kSampleCount) {
    throw Error(ErrorCode::InvalidConfig, "expected 7 reports, got " + std::to_string(reports.size()));
  }
  const auto n = reports.front().branches.size();
  for (const auto& r : reports) {
    if (r.branches.size() != n) throw Error(ErrorCode::BranchSetMismatch, "reports differ in branch count");
  }
  std::vector<std::array<double, kSampleCount>> values(n);
  for (std::size_t b = 0; b < n; ++b) {
    for (int i = 0; i < kSampleCount; ++i) values[b][i] = reports[i].branches[b].tdi;
  }
  return relative_distribution(values);
}

double robustness_score(const RelativeDistributionMatrix& matrix) {
  if (matrix.size() < 2) {
    throw Error(ErrorCode::TooFewBranches,
                "robustness needs at least 2 branches, got " + std::to_string(matrix.size()));
  }
  const auto inf = std::numeric_limits<double>::infinity();
  double score = 0.0;
  std::vector<double> ratios(matrix.size());
  for (int i = 0; i < kSampleCount; ++i) {
    for (int j = i + 1; j < kSampleCount; ++j) {
      for (std::size_t r = 0; r < matrix.size(); ++r) {
        const double num = matrix.rows[r][i];
        const double den = matrix.rows[r][j];
        if (!(den > 0.0) || !std::isfinite(num)) return inf;
        ratios[r] = num / den;
      }
      const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) /
                          static_cast<double>(ratios.size());
      if (!(mean > 0.0)) return inf;
      double ss = 0.0;
      for (const double x : ratios) ss += (x - mean) * (x - mean);
      const double cv = std::sqrt(ss / static_cast<double>(ratios.size())) / mean;
      score = std::max(score, cv);
    }
  }
  return score;
}

std::vector<std::array<double, kSampleCount>> phi_sample_values(const Dataset& dataset,
                                                                const SamplePartition& partition,
                                                                int day) {
  std::vector<std::array<double, kSampleCount>> values(dataset.branch_count());
  for (int i = 1; i <= kSampleCount; ++i) {
    const auto estimate = phi(dataset, partition.sample(i), day, sample_name(i));
    for (std::size_t b = 0; b < values.size(); ++b) values[b][i - 1] = estimate.shares[b];
  }
  return values;
}

BaselineMatrices baseline_matrices(std::size_t branch_count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.5, 1.5);
  std::vector<std::array<double, kSampleCount>> constant(branch_count);
  std::vector<std::array<double, kSampleCount>> noise(branch_count);
  for (std::size_t b = 0; b < branch_count; ++b) {
    constant[b].fill(uniform(rng));
    for (auto& v : noise[b]) v = uniform(rng);
  }
  return {relative_distribution(constant), relative_distribution(noise)};
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<OccurringTdis> occurring_tdis(std::span<const TdiReport> reports) {
  std::vector<OccurringTdis> out;
  out.reserve(reports.size());
  for (const auto& report : reports) {
    OccurringTdis occ;
    occ.sample = report.sample;
    occ.sorted = report.values();
    std::sort(occ.sorted.begin(), occ.sorted.end());
    if (!occ.sorted.empty()) {
      occ.min = occ.sorted.front();
      occ.max = occ.sorted.back();
      occ.q1 = quantile_sorted(occ.sorted, 0.25);
      occ.median = quantile_sorted(occ.sorted, 0.5);
      occ.q3 = quantile_sorted(occ.sorted, 0.75);
    }
    out.push_back(std::move(occ));
  }
  return out;
}

void write_tdi_report_header(std::ostream& out) { out << "branch_id,sample,W,L,C,TDI\n"; }

void write_tdi_report_rows(std::ostream& out, const TdiReport& report,
                           std::span<const std::string> branch_ids) {
  for (std::size_t b = 0; b < report.branches.size(); ++b) {
    const auto& row = report.branches[b];
    out << branch_ids[b] << ',' << report.sample << ',' << row.wins << ',' << row.losses << ','
        << csv::format_double(report.dampening) << ',' << csv::format_double(row.tdi) << '\n';
  }
}

std::vector<TdiCsvRow> read_tdi_report_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string_view> fields;
  auto bad = [&](const std::string& what) -> Error {
    return Error(ErrorCode::MalformedRow,
                 "TDI report line " + std::to_string(reader.line_number()) + ": " + what);
  };
  if (!reader.next(fields) || fields.size() != 6 || fields[0] != "branch_id" ||
      fields[1] != "sample" || fields[2] != "W" || fields[3] != "L" || fields[4] != "C" ||
      fields[5] != "TDI") {
    throw bad("expected header branch_id,sample,W,L,C,TDI");
  }
  std::vector<TdiCsvRow> rows;
  while (reader.next(fields)) {
    if (fields.size() != 6) throw bad("expected 6 columns");
    const auto w = csv::parse_int<std::int64_t>(fields[2]);
    const auto l = csv::parse_int<std::int64_t>(fields[3]);
    const auto c = csv::parse_double(fields[4]);
    const auto t = csv::parse_double(fields[5]);
    if (!w || !l || !c || !t || *w < 0 || *l < 0 || !(*t > 0.0)) throw bad("invalid value");
    rows.push_back({std::string(fields[0]), std::string(fields[1]), *w, *l, *c, *t});
  }
  return rows;
}

void write_matrix_csv(std::ostream& out, const RelativeDistributionMatrix& matrix,
                      std::span<const std::string> branch_ids) {
  out << "branch_id";
  for (int i = 1; i <= kSampleCount; ++i) out << ",rel_D" << i;
  out << '\n';
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    out << branch_ids[matrix.branch[r]];
    for (const double v : matrix.rows[r]) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

void write_occurring_csv(std::ostream& out, std::span<const OccurringTdis> occurring) {
  out << "sample,rank,tdi\n";
  for (const auto& occ : occurring) {
    for (std::size_t k = 0; k < occ.sorted.size(); ++k) {
      out << occ.sample << ',' << k + 1 << ',' << csv::format_double(occ.sorted[k]) << '\n';
    }
  }
}

void write_occurring_summary_csv(std::ostream& out, std::span<const OccurringTdis> occurring) {
  out << "sample,min,q1,median,q3,max,spread\n";
  for (const auto& occ : occurring) {
    out << occ.sample << ',' << csv::format_double(occ.min) << ',' << csv::format_double(occ.q1)
        << ',' << csv::format_double(occ.median) << ',' << csv::format_double(occ.q3) << ','
        << csv::format_double(occ.max) << ',' << csv::format_double(occ.spread()) << '\n';
  }
}

}  // namespace topdog
