#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "topdog/core_model.hpp"
#include "topdog/optimizer.hpp"
#include "topdog/tdi.hpp"

namespace topdog {

// The simulator is a test oracle with known ground-truth branch demand. It is
// not a fitted demand model: daily sales follow a truncated Poisson law only
// because that is the simplest integer process with small sale numbers.

struct MarkdownStep {
  int after_day = 30;
  double multiplier = 2.0;
};

struct SimConfig {
  std::vector<double> branch_weights;  // true relative demand, sums to 1
  std::size_t product_count = 400;
  double attractiveness_min = 0.5;  // a_p is log-uniform on [min, max]
  double attractiveness_max = 2.0;
  int horizon = kDefaultHorizon;
  double base_rate = 0.02;  // expected items per branch and day at weight 1/|B|
  // The multiplier of the last step with after_day < day applies; 1 before.
  // Default: slow launch week, then successive price cuts.
  std::vector<MarkdownStep> markdown{{7, 4.0}, {21, 8.0}, {40, 12.0}};
  std::uint64_t seed = 1;

  std::size_t branch_count() const noexcept { return branch_weights.size(); }
  double markdown_multiplier(int day) const noexcept;

  // Throws Error{InvalidConfig}.
  void validate() const;
};

// Dense items(b,p) matrix, product-major.
class ItemMatrix {
 public:
  ItemMatrix() = default;
  ItemMatrix(std::size_t branch_count, std::size_t product_count)
      : branches_(branch_count), products_(product_count), data_(branch_count * product_count, 0) {}

  std::size_t branch_count() const noexcept { return branches_; }
  std::size_t product_count() const noexcept { return products_; }

  std::int64_t& at(ProductIndex p, BranchIndex b) { return data_[p * branches_ + b]; }
  std::int64_t at(ProductIndex p, BranchIndex b) const { return data_[p * branches_ + b]; }

  // Per-branch totals over all products.
  std::vector<double> branch_totals() const;

 private:
  std::size_t branches_ = 0;
  std::size_t products_ = 0;
  std::vector<std::int64_t> data_;
};

// Zero-padded ids whose lexicographic order matches the numeric order.
std::vector<std::string> make_branch_ids(std::size_t count);
std::vector<std::string> make_product_ids(std::size_t count);

// Daily sales per (b,p) are Poisson with mean
// base_rate * w(b) * |B| * a_p * m(day), truncated so that cumulative sales
// never exceed items(b,p). Demand after a stock-out is lost. Each product
// draws from its own stream seeded by (seed, product), so the result does not
// depend on evaluation order.
Dataset simulate(const SimConfig& config, const ItemMatrix& items);

// Per-product sub-seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct SupplySetup {
  double items_per_branch = 3.5;  // mean items per (b,p)
  double total_spread = 0.5;      // product totals uniform on mean * [1-s, 1+s]
};

// Splits each product's total over branches by largest remainder on `plan`.
ItemMatrix allocate_items(const SupplyPlan& plan, std::size_t product_count,
                          const SupplySetup& setup, std::uint64_t seed);

// Spearman correlation between TDI(b) and the true undersupply ratio
// w(b) / supply_share(b). Throws Error{TooFewBranches} below 3 branches.
double evaluate_recovery(std::span<const double> tdis, const SimConfig& config,
                         const ItemMatrix& items);
double evaluate_recovery(std::span<const double> tdis, const SimConfig& config,
                         const SupplyPlan& plan);

// Sum_b |plan(b) - w(b)|.
double demand_gap(const SupplyPlan& plan, const SimConfig& config);

struct LoopPolicy {
  int cluster_count = kDefaultClusterCount;
  double step_mass = kDefaultStepMass;  // increments +-step_mass/|B|
  double decay = 1.0;                   // increments scale by decay^(round-1)
  double dampening = kDefaultDampening;
  std::optional<ClusterConfig> fixed;   // replaces the per-round quantile clusters
  SupplySetup supply;
};

struct TrajectoryRound {
  int round = 0;
  SupplyPlan plan;     // plan after this round's update
  TdiReport report;    // measured on the season supplied with the previous plan
  double gap = 0.0;    // demand_gap(plan)
  double recovery = 0.0;
  bool updated = true;  // false when the TDIs were too degenerate to cluster
};

struct Trajectory {
  SupplyPlan initial;
  double initial_gap = 0.0;
  std::vector<TrajectoryRound> rounds;
};

// Each round: discretize the plan, simulate a fresh season, compute stock-out
// days and the TDI over all products, classify, update.
Trajectory closed_loop(const SimConfig& config, const SupplyPlan& initial, const LoopPolicy& policy,
                       int rounds);

// CSV `round,gap,score,gap_ratio,tdi_min,tdi_max,updated`; score is the
// recovery correlation of that round.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

// Supply factor cycles applied over branches b = 0, 1, 2, 0, ...
inline const std::vector<double> kMildMisSupply{0.8, 1.0, 1.25};
inline const std::vector<double> kStrongMisSupply{0.5, 1.0, 2.0};
inline const std::vector<double> kHalfGroupShort{0.5, 1.0, 1.0};

// Reference scenario: weights log-uniform on [0.5, 2] (normalized), supply
// factors cycling over branches.
struct MarketScenario {
  SimConfig config;
  std::vector<double> supply_factors;  // per branch, multiplies w(b) in the supply plan
  SupplySetup supply;
  LoopPolicy loop;
  int rounds = 10;

  SupplyPlan supply_plan() const;
};

MarketScenario default_market(std::size_t branch_count = 200, std::size_t product_count = 400,
                              std::uint64_t seed = 1,
                              const std::vector<double>& factor_cycle = kMildMisSupply);

// Weights drawn log-uniform on [lo, hi] and normalized.
std::vector<double> random_weights(std::size_t count, double lo, double hi, std::uint64_t seed);

// JSON form of MarketScenario (see README for keys). Throws Error{InvalidConfig}.
MarketScenario read_scenario(std::istream& in);
void write_scenario(std::ostream& out, const MarketScenario& scenario);

}  // namespace topdog
