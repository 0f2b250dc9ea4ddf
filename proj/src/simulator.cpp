#include "topdog/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

#include "topdog/csv.hpp"
#include "topdog/error.hpp"
#include "topdog/rank_stats.hpp"
#include "topdog/sampling.hpp"
#include "topdog/stockout.hpp"

namespace topdog {

namespace {

std::vector<std::string> padded_ids(char prefix, std::size_t count) {
  const auto width = std::to_string(std::max<std::size_t>(count, 1)).size();
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    auto digits = std::to_string(i);
    ids.push_back(prefix + std::string(width - digits.size(), '0') + digits);
  }
  return ids;
}

}  // namespace

double SimConfig::markdown_multiplier(int day) const noexcept {
  double m = 1.0;
  for (const auto& step : markdown) {
    if (day > step.after_day) m = step.multiplier;
  }
  return m;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (branch_weights.empty()) fail("no branches");
  double total = 0.0;
  for (const double w : branch_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) fail("branch weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) fail("branch weights must sum to 1");
  if (!(base_rate > 0.0) || !std::isfinite(base_rate)) fail("base rate must be positive");
  if (!(attractiveness_min > 0.0) || attractiveness_max < attractiveness_min) {
    fail("attractiveness range must satisfy 0 < min <= max");
  }
  if (horizon < 1) fail("horizon must be >= 1");
  for (std::size_t k = 0; k < markdown.size(); ++k) {
    if (markdown[k].multiplier < 1.0) fail("markdown multipliers must be >= 1");
    if (k > 0 && (markdown[k].multiplier < markdown[k - 1].multiplier ||
                  markdown[k].after_day <= markdown[k - 1].after_day)) {
      fail("markdown steps must be ordered by day with nondecreasing multipliers");
    }
  }
}

std::vector<double> ItemMatrix::branch_totals() const {
  std::vector<double> totals(branches_, 0.0);
  for (std::size_t p = 0; p < products_; ++p) {
    for (std::size_t b = 0; b < branches_; ++b) totals[b] += static_cast<double>(data_[p * branches_ + b]);
  }
  return totals;
}

std::vector<std::string> make_branch_ids(std::size_t count) { return padded_ids('b', count); }
std::vector<std::string> make_product_ids(std::size_t count) { return padded_ids('p', count); }

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined state
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Dataset simulate(const SimConfig& config, const ItemMatrix& items) {
  config.validate();
  const auto n_branches = config.branch_count();
  if (items.branch_count() != n_branches || items.product_count() != config.product_count) {
    throw Error(ErrorCode::InvalidConfig, "item matrix does not match the configuration");
  }
  std::vector<double> day_factor(config.horizon);
  for (int d = 1; d <= config.horizon; ++d) day_factor[d - 1] = config.markdown_multiplier(d);

  std::vector<SupplyEntry> supply;
  supply.reserve(n_branches * config.product_count);
  std::vector<Transaction> sales;
  const double log_lo = std::log(config.attractiveness_min);
  const double log_hi = std::log(config.attractiveness_max);

  for (ProductIndex p = 0; p < config.product_count; ++p) {
    std::mt19937_64 rng(derive_seed(config.seed, p));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> exposure(1.0);
    const double attractiveness = std::exp(log_lo + (log_hi - log_lo) * unit(rng));

    for (BranchIndex b = 0; b < n_branches; ++b) {
      const auto stock = items.at(p, b);
      supply.push_back({p, b, stock});
      if (stock <= 0) continue;
      const double rate = config.base_rate * config.branch_weights[b] *
                          static_cast<double>(n_branches) * attractiveness;
      // Customer arrivals form a Poisson process whose intensity is constant
      // within a day, so daily counts are independent Poisson draws. Each
      // arrival buys one item until the stock is gone.
      std::int64_t left = stock;
      double wait = exposure(rng);
      for (int d = 1; d <= config.horizon && left > 0; ++d) {
        double budget = rate * day_factor[d - 1];
        std::int64_t sold = 0;
        while (wait <= budget && left > 0) {
          budget -= wait;
          ++sold;
          --left;
          wait = exposure(rng);
        }
        if (left > 0) wait -= budget;
        if (sold > 0) sales.push_back({p, b, d, sold});
      }
    }
  }
  return Dataset::from_parts(make_branch_ids(n_branches), make_product_ids(config.product_count),
                             std::move(supply), std::move(sales), config.horizon);
}

ItemMatrix allocate_items(const SupplyPlan& plan, std::size_t product_count,
                          const SupplySetup& setup, std::uint64_t seed) {
  const auto n = plan.shares.size();
  ItemMatrix items(n, product_count);
  std::mt19937_64 rng(derive_seed(seed, 0xa110cULL));
  std::uniform_real_distribution<double> spread(1.0 - setup.total_spread, 1.0 + setup.total_spread);
  for (ProductIndex p = 0; p < product_count; ++p) {
    const double mean_total = setup.items_per_branch * static_cast<double>(n);
    const auto total = static_cast<std::int64_t>(std::llround(mean_total * spread(rng)));
    const auto row = discretize_plan(plan, std::max<std::int64_t>(total, 0));
    for (BranchIndex b = 0; b < n; ++b) items.at(p, b) = row[b];
  }
  return items;
}

double evaluate_recovery(std::span<const double> tdis, const SimConfig& config,
                         const SupplyPlan& plan) {
  const auto n = config.branch_count();
  if (n < 3) throw Error(ErrorCode::TooFewBranches, "recovery needs at least 3 branches");
  if (tdis.size() != n || plan.shares.size() != n) {
    throw Error(ErrorCode::BranchSetMismatch, "TDI, plan and configuration differ in branch count");
  }
  std::vector<double> undersupply(n);
  for (std::size_t b = 0; b < n; ++b) {
    undersupply[b] = plan.shares[b] > 0.0 ? config.branch_weights[b] / plan.shares[b]
                                          : std::numeric_limits<double>::infinity();
  }
  return spearman(tdis, undersupply);
}

double evaluate_recovery(std::span<const double> tdis, const SimConfig& config,
                         const ItemMatrix& items) {
  if (config.branch_count() < 3) throw Error(ErrorCode::TooFewBranches, "recovery needs at least 3 branches");
  return evaluate_recovery(tdis, config, SupplyPlan::from_weights(items.branch_totals(), "items"));
}

double demand_gap(const SupplyPlan& plan, const SimConfig& config) {
  return discrepancy(plan.shares, config.branch_weights);
}

Trajectory closed_loop(const SimConfig& config, const SupplyPlan& initial, const LoopPolicy& policy,
                       int rounds) {
  config.validate();
  if (rounds < 1) throw Error(ErrorCode::InvalidConfig, "need at least one round");
  if (initial.shares.size() != config.branch_count()) {
    throw Error(ErrorCode::BranchSetMismatch, "initial plan does not match the configuration");
  }
  if (policy.fixed) policy.fixed->validate();
  tdi(0, 0, policy.dampening);

  Trajectory trajectory{initial, demand_gap(initial, config), {}};
  SupplyPlan plan = initial;
  const auto everything = all_products(config.product_count);
  for (int t = 1; t <= rounds; ++t) {
    SimConfig season = config;
    season.seed = derive_seed(config.seed, 0x5ea5011ULL + static_cast<std::uint64_t>(t));
    const auto items = allocate_items(plan, config.product_count, policy.supply, season.seed);
    const auto dataset = simulate(season, items);
    const auto table = compute_stockout_days(dataset);
    auto report = make_tdi_report(top_dog_counts(table, everything), policy.dampening, "D7");
    const auto values = report.values();
    const double recovery = evaluate_recovery(values, config, items);

    bool updated = true;
    ClusterConfig clusters;
    if (policy.fixed) {
      clusters = *policy.fixed;
    } else {
      try {
        clusters = default_cluster_config(values, policy.cluster_count, policy.step_mass);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateTdis) throw;
        updated = false;
      }
    }
    if (updated) {
      const double scale = std::pow(policy.decay, t - 1);
      for (auto& delta : clusters.increments) delta *= scale;
      plan = update_supply(plan, classify(values, clusters), clusters);
    }
    plan.provenance = "round " + std::to_string(t);
    trajectory.rounds.push_back(
        {t, plan, std::move(report), demand_gap(plan, config), recovery, updated});
  }
  return trajectory;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "round,gap,score,gap_ratio,tdi_min,tdi_max,updated\n";
  for (const auto& r : trajectory.rounds) {
    const auto values = r.report.values();
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    out << r.round << ',' << csv::format_double(r.gap) << ',' << csv::format_double(r.recovery)
        << ','
        << csv::format_double(trajectory.initial_gap > 0.0 ? r.gap / trajectory.initial_gap : 0.0)
        << ',' << csv::format_double(values.empty() ? 1.0 : *lo) << ','
        << csv::format_double(values.empty() ? 1.0 : *hi) << ',' << (r.updated ? 1 : 0) << '\n';
  }
}

std::vector<double> random_weights(std::size_t count, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, 0x3e16ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> raw(count);
  for (auto& w : raw) w = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * unit(rng));
  return SupplyPlan::from_weights(raw, "weights").shares;
}

SupplyPlan MarketScenario::supply_plan() const {
  std::vector<double> raw(config.branch_count());
  for (std::size_t b = 0; b < raw.size(); ++b) {
    const double factor = b < supply_factors.size() ? supply_factors[b] : 1.0;
    raw[b] = config.branch_weights[b] * factor;
  }
  return SupplyPlan::from_weights(raw, "scenario");
}

MarketScenario default_market(std::size_t branch_count, std::size_t product_count,
                              std::uint64_t seed, const std::vector<double>& factor_cycle) {
  MarketScenario scenario;
  scenario.config.branch_weights = random_weights(branch_count, 0.5, 2.0, seed);
  scenario.config.product_count = product_count;
  scenario.config.seed = seed;
  scenario.supply_factors.resize(branch_count);
  for (std::size_t b = 0; b < branch_count; ++b) {
    scenario.supply_factors[b] = factor_cycle[b % factor_cycle.size()];
  }
  scenario.loop.supply = scenario.supply;
  return scenario;
}

MarketScenario read_scenario(std::istream& in) {
  MarketScenario s;
  try {
    const auto j = nlohmann::json::parse(in);
    const auto seed = j.value("seed", std::uint64_t{1});
    if (j.contains("branch_weights")) {
      const auto w = j.at("branch_weights").get<std::vector<double>>();
      s.config.branch_weights = SupplyPlan::from_weights(w, "weights").shares;
    } else {
      const auto n = j.value("branches", std::size_t{200});
      const auto range = j.value("weight_range", std::vector<double>{0.5, 2.0});
      if (range.size() != 2 || !(range[0] > 0.0) || range[1] < range[0]) {
        throw Error(ErrorCode::InvalidConfig, "weight_range must be [lo, hi] with 0 < lo <= hi");
      }
      s.config.branch_weights = random_weights(n, range[0], range[1], seed);
    }
    const auto n = s.config.branch_count();
    s.config.product_count = j.value("products", std::size_t{400});
    if (j.contains("attractiveness")) {
      const auto a = j.at("attractiveness").get<std::vector<double>>();
      if (a.size() != 2) throw Error(ErrorCode::InvalidConfig, "attractiveness must be [min, max]");
      s.config.attractiveness_min = a[0];
      s.config.attractiveness_max = a[1];
    }
    s.config.horizon = j.value("horizon", kDefaultHorizon);
    s.config.base_rate = j.value("base_rate", s.config.base_rate);
    if (j.contains("markdown")) {
      s.config.markdown.clear();
      for (const auto& step : j.at("markdown")) {
        s.config.markdown.push_back({step.at("after_day").get<int>(), step.at("multiplier").get<double>()});
      }
    }
    s.config.seed = seed;

    std::vector<double> cycle = kMildMisSupply;
    if (j.contains("supply")) {
      const auto& sup = j.at("supply");
      s.supply.items_per_branch = sup.value("items_per_branch", s.supply.items_per_branch);
      s.supply.total_spread = sup.value("total_spread", s.supply.total_spread);
      if (sup.contains("factors")) {
        s.supply_factors = sup.at("factors").get<std::vector<double>>();
        if (s.supply_factors.size() != n) {
          throw Error(ErrorCode::InvalidConfig, "supply.factors needs one entry per branch");
        }
      } else if (sup.contains("factor_cycle")) {
        cycle = sup.at("factor_cycle").get<std::vector<double>>();
      }
    }
    if (s.supply_factors.empty()) {
      if (cycle.empty()) throw Error(ErrorCode::InvalidConfig, "factor_cycle must not be empty");
      s.supply_factors.resize(n);
      for (std::size_t b = 0; b < n; ++b) s.supply_factors[b] = cycle[b % cycle.size()];
    }
    for (const double f : s.supply_factors) {
      if (!(f > 0.0)) throw Error(ErrorCode::InvalidConfig, "supply factors must be positive");
    }

    s.loop.supply = s.supply;
    if (j.contains("loop")) {
      const auto& loop = j.at("loop");
      s.rounds = loop.value("rounds", s.rounds);
      s.loop.cluster_count = loop.value("clusters", s.loop.cluster_count);
      s.loop.step_mass = loop.value("step_mass", s.loop.step_mass);
      s.loop.decay = loop.value("decay", s.loop.decay);
      s.loop.dampening = loop.value("dampening", s.loop.dampening);
      if (loop.contains("cluster_config")) {
        ClusterConfig fixed;
        fixed.boundaries = loop.at("cluster_config").at("boundaries").get<std::vector<double>>();
        fixed.increments = loop.at("cluster_config").at("increments").get<std::vector<double>>();
        fixed.validate();
        s.loop.fixed = fixed;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("simulation config: ") + e.what());
  }
  s.config.validate();
  return s;
}

void write_scenario(std::ostream& out, const MarketScenario& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.config.seed;
  j["branch_weights"] = s.config.branch_weights;
  j["products"] = s.config.product_count;
  j["attractiveness"] = {s.config.attractiveness_min, s.config.attractiveness_max};
  j["horizon"] = s.config.horizon;
  j["base_rate"] = s.config.base_rate;
  auto markdown = nlohmann::ordered_json::array();
  for (const auto& step : s.config.markdown) {
    markdown.push_back({{"after_day", step.after_day}, {"multiplier", step.multiplier}});
  }
  j["markdown"] = markdown;
  j["supply"] = {{"items_per_branch", s.supply.items_per_branch},
                 {"total_spread", s.supply.total_spread},
                 {"factors", s.supply_factors}};
  nlohmann::ordered_json loop;
  loop["rounds"] = s.rounds;
  loop["clusters"] = s.loop.cluster_count;
  loop["step_mass"] = s.loop.step_mass;
  loop["decay"] = s.loop.decay;
  loop["dampening"] = s.loop.dampening;
  if (s.loop.fixed) {
    loop["cluster_config"] = {{"boundaries", s.loop.fixed->boundaries},
                              {"increments", s.loop.fixed->increments}};
  }
  j["loop"] = loop;
  out << j.dump(2) << '\n';
}

}  // namespace topdog
