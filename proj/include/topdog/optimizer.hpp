#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "topdog/core_model.hpp"

namespace topdog {

inline constexpr int kDefaultClusterCount = 3;
inline constexpr double kDefaultStepMass = 0.1;  // per round, divided by |B|

// Partition of (0, inf) into l intervals (0,t1], (t1,t2], ..., (t_{l-1}, inf)
// with one share increment per interval.
struct ClusterConfig {
  std::vector<double> boundaries;
  std::vector<double> increments;
  // Require increments to be nondecreasing in the cluster index, i.e. a higher
  // TDI never receives a smaller increment.
  bool monotone_increments = true;

  std::size_t cluster_count() const noexcept { return increments.size(); }

  // Throws Error{InvalidConfig}.
  void validate() const;
};

// Increments spread evenly from -step to +step over l clusters; (-step, 0, +step)
// for l = 3.
std::vector<double> symmetric_increments(int cluster_count, double step);

// l-1 boundaries at the midpoints between neighbouring occurring values that
// best split them into l equally populated clusters. Throws
// Error{DegenerateTdis} when fewer than l distinct values occur.
std::vector<double> default_intervals(std::span<const double> tdis, int cluster_count);

ClusterConfig default_cluster_config(std::span<const double> tdis,
                                     int cluster_count = kDefaultClusterCount,
                                     double step_mass = kDefaultStepMass);

// 1-based cluster j(b) with TDI(b) in I_j.
std::vector<int> classify(std::span<const double> tdis, const ClusterConfig& config);

struct SupplyPlan {
  std::vector<double> shares;  // indexed by branch, sums to 1
  std::string provenance;

  // Normalizes nonnegative weights. Throws Error{NegativeShare | ZeroMass}.
  static SupplyPlan from_weights(std::span<const double> weights, std::string provenance);
};

// Historic shares S(b) = sum_p S(b,p) / sum_{b',p} S(b',p).
SupplyPlan historic_plan(const Dataset& dataset);

// S~(b) = (S(b) + D_j(b)) / sum_b' (S(b') + D_j(b')).
// Throws Error{NegativeShare} if some S(b) + D_j(b) < 0, Error{ZeroMass} if
// the total vanishes. All-zero applied increments return the plan unchanged.
SupplyPlan update_supply(const SupplyPlan& plan, std::span<const int> assignment,
                         const ClusterConfig& config);

// Largest-remainder apportionment of `total_items`; equal remainders go to the
// lower branch index.
std::vector<std::int64_t> discretize_plan(const SupplyPlan& plan, std::int64_t total_items);

// CSV `branch_id,share`.
void write_plan_csv(std::ostream& out, const SupplyPlan& plan,
                    std::span<const std::string> branch_ids);
// CSV `branch_id,items`.
void write_items_csv(std::ostream& out, std::span<const std::int64_t> items,
                     std::span<const std::string> branch_ids);

struct NamedPlan {
  std::vector<std::string> branch_ids;
  SupplyPlan plan;
};

// Shares are renormalized unless they already sum to 1 within 1e-9. Throws Error{MalformedRow}.
NamedPlan read_plan_csv(std::istream& in);

// JSON `{"boundaries": [...], "increments": [...]}`.
ClusterConfig read_cluster_config(std::istream& in);
void write_cluster_config(std::ostream& out, const ClusterConfig& config);

}  // namespace topdog
