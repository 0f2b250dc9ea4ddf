#include "topdog/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "topdog/csv.hpp"
#include "topdog/error.hpp"

namespace topdog {

void ClusterConfig::validate() const {
  if (increments.size() != boundaries.size() + 1) {
    throw Error(ErrorCode::InvalidConfig, std::to_string(boundaries.size()) + " boundaries need " +
                                              std::to_string(boundaries.size() + 1) +
                                              " increments, got " +
                                              std::to_string(increments.size()));
  }
  for (std::size_t k = 0; k < boundaries.size(); ++k) {
    if (!std::isfinite(boundaries[k]) || boundaries[k] <= 0.0) {
      throw Error(ErrorCode::InvalidConfig, "boundaries must be positive and finite");
    }
    if (k > 0 && !(boundaries[k - 1] < boundaries[k])) {
      throw Error(ErrorCode::InvalidConfig, "boundaries must be strictly ascending");
    }
  }
  for (std::size_t j = 0; j < increments.size(); ++j) {
    if (!std::isfinite(increments[j])) throw Error(ErrorCode::InvalidConfig, "increments must be finite");
    if (monotone_increments && j > 0 && increments[j] < increments[j - 1]) {
      throw Error(ErrorCode::InvalidConfig, "increments must be nondecreasing in the cluster index");
    }
  }
}

std::vector<double> symmetric_increments(int cluster_count, double step) {
  std::vector<double> out(std::max(cluster_count, 1), 0.0);
  if (cluster_count < 2) return out;
  for (int j = 0; j < cluster_count; ++j) {
    out[j] = step * (2.0 * j / (cluster_count - 1) - 1.0);
  }
  // Keep the middle cluster of an odd count exactly neutral.
  if (cluster_count % 2 == 1) out[cluster_count / 2] = 0.0;
  return out;
}

std::vector<double> default_intervals(std::span<const double> tdis, int cluster_count) {
  if (cluster_count < 2) throw Error(ErrorCode::InvalidConfig, "need at least 2 clusters");
  std::vector<double> sorted(tdis.begin(), tdis.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();

  // A cut at c separates sorted[c-1] from sorted[c]; only cuts between
  // distinct values are usable.
  std::vector<std::size_t> cuts;
  for (std::size_t c = 1; c < n; ++c) {
    if (sorted[c - 1] < sorted[c]) cuts.push_back(c);
  }
  const auto needed = static_cast<std::size_t>(cluster_count - 1);
  if (cuts.size() < needed) {
    throw Error(ErrorCode::DegenerateTdis, std::to_string(cuts.size() + (n > 0 ? 1 : 0)) +
                                               " distinct TDI values for " +
                                               std::to_string(cluster_count) + " clusters");
  }

  std::vector<double> boundaries;
  std::size_t first_allowed = 0;
  for (std::size_t k = 1; k <= needed; ++k) {
    const double target = static_cast<double>(k * n) / cluster_count;
    const std::size_t last_allowed = cuts.size() - (needed - k) - 1;
    std::size_t best = first_allowed;
    for (std::size_t i = first_allowed; i <= last_allowed; ++i) {
      if (std::abs(static_cast<double>(cuts[i]) - target) <
          std::abs(static_cast<double>(cuts[best]) - target)) {
        best = i;
      }
    }
    const auto c = cuts[best];
    boundaries.push_back(0.5 * (sorted[c - 1] + sorted[c]));
    first_allowed = best + 1;
  }
  return boundaries;
}

ClusterConfig default_cluster_config(std::span<const double> tdis, int cluster_count,
                                     double step_mass) {
  ClusterConfig config;
  config.boundaries = default_intervals(tdis, cluster_count);
  config.increments =
      symmetric_increments(cluster_count, step_mass / static_cast<double>(tdis.size()));
  return config;
}

std::vector<int> classify(std::span<const double> tdis, const ClusterConfig& config) {
  std::vector<int> out;
  out.reserve(tdis.size());
  for (const double t : tdis) {
    const auto below = std::lower_bound(config.boundaries.begin(), config.boundaries.end(), t) -
                       config.boundaries.begin();
    out.push_back(static_cast<int>(below) + 1);
  }
  return out;
}

SupplyPlan SupplyPlan::from_weights(std::span<const double> weights, std::string provenance) {
  double total = 0.0;
  for (const double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw Error(ErrorCode::NegativeShare, "negative or non-finite weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroMass, "weights sum to zero");
  SupplyPlan plan{std::vector<double>(weights.size()), std::move(provenance)};
  for (std::size_t b = 0; b < weights.size(); ++b) plan.shares[b] = weights[b] / total;
  return plan;
}

SupplyPlan historic_plan(const Dataset& ds) {
  std::vector<double> supplied(ds.branch_count(), 0.0);
  for (const auto& e : ds.supply()) supplied[e.branch] += static_cast<double>(e.quantity);
  try {
    return SupplyPlan::from_weights(supplied, "historic");
  } catch (const Error& e) {
    throw Error(ErrorCode::ZeroSupply, "dataset has no supply");
  }
}

SupplyPlan update_supply(const SupplyPlan& plan, std::span<const int> assignment,
                         const ClusterConfig& config) {
  if (assignment.size() != plan.shares.size()) {
    throw Error(ErrorCode::BranchSetMismatch, "assignment covers " +
                                                  std::to_string(assignment.size()) +
                                                  " branches, plan " +
                                                  std::to_string(plan.shares.size()));
  }
  std::vector<double> raised(plan.shares.size());
  bool all_zero = true;
  double total = 0.0;
  for (std::size_t b = 0; b < raised.size(); ++b) {
    const int j = assignment[b];
    if (j < 1 || static_cast<std::size_t>(j) > config.cluster_count()) {
      throw Error(ErrorCode::InvalidConfig, "cluster index " + std::to_string(j) + " out of range");
    }
    const double delta = config.increments[j - 1];
    all_zero = all_zero && delta == 0.0;
    raised[b] = plan.shares[b] + delta;
    if (raised[b] < 0.0) {
      throw Error(ErrorCode::NegativeShare, "branch " + std::to_string(b) + " share " +
                                                csv::format_double(plan.shares[b]) +
                                                " with increment " + csv::format_double(delta));
    }
    total += raised[b];
  }
  if (all_zero) return {plan.shares, "updated"};
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroMass, "updated supply has no mass");
  for (auto& v : raised) v /= total;
  return {std::move(raised), "updated"};
}

std::vector<std::int64_t> discretize_plan(const SupplyPlan& plan, std::int64_t total_items) {
  const auto n = plan.shares.size();
  std::vector<std::int64_t> items(n, 0);
  if (total_items <= 0 || n == 0) return items;
  const double mass = std::accumulate(plan.shares.begin(), plan.shares.end(), 0.0);
  std::vector<double> remainder(n);
  std::int64_t assigned = 0;
  for (std::size_t b = 0; b < n; ++b) {
    const double quota = plan.shares[b] / mass * static_cast<double>(total_items);
    items[b] = static_cast<std::int64_t>(std::floor(quota));
    remainder[b] = quota - static_cast<double>(items[b]);
    assigned += items[b];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total_items; k = (k + 1) % n, ++assigned) ++items[order[k]];
  return items;
}

void write_plan_csv(std::ostream& out, const SupplyPlan& plan, std::span<const std::string> branch_ids) {
  out << "branch_id,share\n";
  for (std::size_t b = 0; b < plan.shares.size(); ++b) {
    out << branch_ids[b] << ',' << csv::format_double(plan.shares[b]) << '\n';
  }
}

void write_items_csv(std::ostream& out, std::span<const std::int64_t> items,
                     std::span<const std::string> branch_ids) {
  out << "branch_id,items\n";
  for (std::size_t b = 0; b < items.size(); ++b) out << branch_ids[b] << ',' << items[b] << '\n';
}

NamedPlan read_plan_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string_view> fields;
  auto bad = [&](const std::string& what) {
    return Error(ErrorCode::MalformedRow,
                 "supply plan line " + std::to_string(reader.line_number()) + ": " + what);
  };
  if (!reader.next(fields) || fields.size() != 2 || fields[0] != "branch_id" || fields[1] != "share") {
    throw bad("expected header branch_id,share");
  }
  std::vector<std::pair<std::string, double>> rows;
  while (reader.next(fields)) {
    if (fields.size() != 2) throw bad("expected 2 columns");
    const auto share = csv::parse_double(fields[1]);
    if (!share || *share < 0.0 || !std::isfinite(*share)) throw bad("share must be >= 0");
    rows.emplace_back(std::string(fields[0]), *share);
  }
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) throw bad("duplicate branch " + rows[i].first);
  }
  NamedPlan named;
  std::vector<double> weights;
  for (auto& [id, share] : rows) {
    named.branch_ids.push_back(std::move(id));
    weights.push_back(share);
  }
  // A plan that already sums to 1 is kept bit for bit so that a no-op update
  // reproduces the file.
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) <= 1e-9 && total > 0.0) {
    named.plan = SupplyPlan{std::move(weights), "input"};
  } else {
    named.plan = SupplyPlan::from_weights(weights, "input");
  }
  return named;
}

ClusterConfig read_cluster_config(std::istream& in) {
  ClusterConfig config;
  try {
    const auto json = nlohmann::json::parse(in);
    config.boundaries = json.at("boundaries").get<std::vector<double>>();
    config.increments = json.at("increments").get<std::vector<double>>();
    if (json.contains("monotone_increments")) {
      config.monotone_increments = json.at("monotone_increments").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("cluster config: ") + e.what());
  }
  config.validate();
  return config;
}

void write_cluster_config(std::ostream& out, const ClusterConfig& config) {
  nlohmann::ordered_json json;
  json["boundaries"] = config.boundaries;
  json["increments"] = config.increments;
  json["monotone_increments"] = config.monotone_increments;
  out << json.dump(2) << '\n';
}

}  // namespace topdog
