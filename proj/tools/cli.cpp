#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "topdog/core_model.hpp"
#include "topdog/csv.hpp"
#include "topdog/error.hpp"
#include "topdog/optimizer.hpp"
#include "topdog/sampling.hpp"
#include "topdog/simulator.hpp"
#include "topdog/stockout.hpp"
#include "topdog/tdi.hpp"

#ifndef TOPDOG_VERSION
#define TOPDOG_VERSION "dev"
#endif

namespace topdog::cli {

namespace fs = std::filesystem;

namespace {

// Raised for problems with the command line or its files (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  auto out = open_output(path);
  fn(out);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

void check_dampening(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw UsageError(std::string(error_name(ErrorCode::NonPositiveDampening)) +
                     ": --dampening must be positive");
  }
}

void check_horizon(int horizon) {
  if (horizon < 1) throw UsageError("--horizon must be >= 1");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::vector<std::string_view> fields;
  csv::split(text, fields);
  for (const auto f : fields) {
    const auto v = csv::parse_double(f);
    if (!v) throw UsageError("invalid number in list: " + std::string(f));
    values.push_back(*v);
  }
  return values;
}

struct DataOptions {
  std::string sales;
  std::string supply;
  std::string launch_dates;
  int horizon = kDefaultHorizon;

  void add_to(CLI::App* app) {
    app->add_option("--sales", sales, "Sales CSV (product_id,branch_id,day|date,quantity)")
        ->required();
    app->add_option("--supply", supply, "Supply CSV (product_id,branch_id,quantity)")->required();
    app->add_option("--launch-dates", launch_dates,
                    "Sidecar CSV product_id,launch_date for calendar-dated sales");
    app->add_option("--horizon", horizon, "Analysis window H in days")->capture_default_str();
  }

  std::optional<fs::path> launch() const {
    if (launch_dates.empty()) return std::nullopt;
    return fs::path(launch_dates);
  }

  Dataset load(RunManifest& manifest) const {
    check_horizon(horizon);
    manifest.add_input(sales);
    manifest.add_input(supply);
    if (!launch_dates.empty()) manifest.add_input(launch_dates);
    manifest.parameters["sales"] = sales;
    manifest.parameters["supply"] = supply;
    if (!launch_dates.empty()) manifest.parameters["launch_dates"] = launch_dates;
    manifest.parameters["horizon"] = horizon;
    return load_dataset(sales, supply, LoadOptions{horizon, launch()});
  }
};

// ---------------------------------------------------------------------------

int cmd_validate(const DataOptions& data, const std::string& manifest_path, RunManifest& manifest,
                 std::ostream& out) {
  check_horizon(data.horizon);
  manifest.add_input(data.sales);
  manifest.add_input(data.supply);
  if (!data.launch_dates.empty()) manifest.add_input(data.launch_dates);
  manifest.parameters["horizon"] = data.horizon;
  if (!manifest_path.empty()) manifest.write(manifest_path);

  RawTables tables;
  try {
    tables = read_table_files(data.sales, data.supply, data.launch());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    out << "error: " << e.what() << '\n' << "1 error(s), 0 warning(s)\n";
    return kExitDomain;
  }

  // Rows past the window are not part of the analysed dataset, but still
  // count towards oversale.
  ValidationReport outside;
  std::vector<SalesRecord> in_window;
  std::map<std::pair<std::string, std::string>, std::int64_t> late_sold;
  for (auto& r : tables.sales) {
    if (r.day > data.horizon) {
      late_sold[{r.product_id, r.branch_id}] += r.quantity;
    } else {
      in_window.push_back(r);
    }
  }
  if (!late_sold.empty()) {
    ++outside.warning_count;
    outside.issues.push_back({Severity::Warning, "sales",
                              std::to_string(tables.sales.size() - in_window.size()) +
                                  " row(s) after day " + std::to_string(data.horizon) +
                                  " are outside the analysis window"});
  }
  const auto dataset = Dataset::from_records(tables.supply, in_window, data.horizon);
  auto report = validate_dataset(dataset);
  for (const auto& [pair, qty] : late_sold) {
    const auto p = dataset.find_product(pair.first);
    const auto b = dataset.find_branch(pair.second);
    if (!p || !b) continue;
    std::int64_t sold = qty;
    for (const auto& t : dataset.sales_of_product(*p)) {
      if (t.branch == *b) sold += t.quantity;
    }
    const auto supplied = dataset.supply_quantity(*p, *b);
    if (sold > supplied && sold - qty <= supplied) {
      ++report.error_count;
      report.issues.push_back({Severity::Error,
                               "sales product=" + pair.first + " branch=" + pair.second,
                               "sold " + std::to_string(sold) + " exceeds supply " +
                                   std::to_string(supplied)});
    }
  }
  report.warning_count += outside.warning_count;
  report.issues.insert(report.issues.begin(), outside.issues.begin(), outside.issues.end());
  write_report(out, report);
  return report.ok() ? kExitOk : kExitDomain;
}

int cmd_discrepancy(const DataOptions& data, std::uint64_t seed, int days,
                    const std::string& out_path, const std::string& manifest_path,
                    RunManifest& manifest, std::ostream& out) {
  if (days < 0) throw UsageError("--days must be >= 0");
  const auto dataset = data.load(manifest);
  if (days > dataset.horizon()) {
    throw UsageError("--days " + std::to_string(days) + " exceeds the horizon " +
                     std::to_string(dataset.horizon()));
  }
  manifest.parameters["seed"] = seed;
  manifest.parameters["days"] = days;
  const auto rows = discrepancy_curve(dataset, seed, days);
  if (out_path.empty()) {
    write_discrepancy_csv(out, rows);
  } else {
    manifest.parameters["out"] = out_path;
    write_file(out_path, [&](std::ostream& o) { write_discrepancy_csv(o, rows); });
  }
  if (!manifest_path.empty()) manifest.write(manifest_path);
  return kExitOk;
}

struct TdiOptions {
  std::uint64_t seed = 1;
  double dampening = kDefaultDampening;
  std::string out_dir;
  std::string tiebreak = "shared";
  int phi_day = 5;
  std::uint64_t baseline_seed = 1;
};

int cmd_tdi(const DataOptions& data, const TdiOptions& opt, RunManifest& manifest,
            std::ostream& out) {
  check_dampening(opt.dampening);
  if (opt.tiebreak != "shared" && opt.tiebreak != "remaining-fraction") {
    throw UsageError("--tiebreak must be shared or remaining-fraction");
  }
  const auto dataset = data.load(manifest);
  if (opt.phi_day < 1 || opt.phi_day > dataset.horizon()) {
    throw UsageError("--phi-day must lie in 1..horizon");
  }
  manifest.parameters["seed"] = opt.seed;
  manifest.parameters["dampening"] = opt.dampening;
  manifest.parameters["tiebreak"] = opt.tiebreak;
  manifest.parameters["phi_day"] = opt.phi_day;
  manifest.parameters["baseline_seed"] = opt.baseline_seed;
  manifest.parameters["out_dir"] = opt.out_dir;

  const fs::path dir(opt.out_dir);
  fs::create_directories(dir);
  const auto& ids = dataset.branches();

  const auto table = compute_stockout_days(dataset, opt.tiebreak == "shared"
                                                        ? CensoredTiebreak::Shared
                                                        : CensoredTiebreak::RemainingFraction);
  write_file(dir / "stockout.csv", [&](std::ostream& o) { write_stockout_csv(o, table, dataset); });
  write_file(dir / "supply_plan.csv",
             [&](std::ostream& o) { write_plan_csv(o, historic_plan(dataset), ids); });

  const auto partition = partition_products(dataset.product_count(), opt.seed);
  const auto reports = tdi_report(table, partition, opt.dampening);
  for (const auto& report : reports) {
    write_file(dir / ("tdi_" + report.sample + ".csv"), [&](std::ostream& o) {
      write_tdi_report_header(o);
      write_tdi_report_rows(o, report, ids);
    });
  }

  const auto matrix = relative_distribution(reports);
  write_file(dir / "matrix.csv", [&](std::ostream& o) { write_matrix_csv(o, matrix, ids); });
  const auto occurring = occurring_tdis(reports);
  write_file(dir / "occurring_tdis.csv", [&](std::ostream& o) { write_occurring_csv(o, occurring); });
  write_file(dir / "occurring_summary.csv",
             [&](std::ostream& o) { write_occurring_summary_csv(o, occurring); });

  const auto baselines = baseline_matrices(dataset.branch_count(), opt.baseline_seed);
  write_file(dir / "baseline_deterministic.csv",
             [&](std::ostream& o) { write_matrix_csv(o, baselines.deterministic, ids); });
  write_file(dir / "baseline_random.csv",
             [&](std::ostream& o) { write_matrix_csv(o, baselines.random, ids); });

  nlohmann::ordered_json scores;
  scores["seed"] = opt.seed;
  scores["dampening"] = opt.dampening;
  auto score_or_null = [](const RelativeDistributionMatrix& m) -> nlohmann::ordered_json {
    if (m.size() < 2) return nullptr;
    const double s = robustness_score(m);
    if (!std::isfinite(s)) return "inf";
    return s;
  };
  scores["tdi"] = score_or_null(matrix);
  scores["baseline_deterministic"] = score_or_null(baselines.deterministic);
  scores["baseline_random"] = score_or_null(baselines.random);
  try {
    const auto phi_matrix = relative_distribution(phi_sample_values(dataset, partition, opt.phi_day));
    write_file(dir / "phi_matrix.csv", [&](std::ostream& o) { write_matrix_csv(o, phi_matrix, ids); });
    scores["phi_day"] = opt.phi_day;
    scores["phi"] = score_or_null(phi_matrix);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoSales) throw;
    scores["phi_day"] = opt.phi_day;
    scores["phi"] = nullptr;
  }
  write_file(dir / "robustness.json", [&](std::ostream& o) { o << scores.dump(2) << '\n'; });
  manifest.write(dir / "manifest.json");

  out << "robustness score " << scores["tdi"].dump() << " (random baseline "
      << scores["baseline_random"].dump() << ")\n";
  return kExitOk;
}

struct OptimizeOptions {
  std::string tdi_report;
  std::string supply_plan;
  std::string sample;
  int clusters = kDefaultClusterCount;
  std::string increments;
  double step_mass = kDefaultStepMass;
  std::string cluster_config;
  std::int64_t total_items = -1;
  std::string out;
  std::string items_out;
  std::string config_out;
};

int cmd_optimize(const OptimizeOptions& opt, const std::string& manifest_path,
                 RunManifest& manifest, std::ostream& out) {
  if (opt.total_items >= 0 && opt.items_out.empty()) {
    throw UsageError("--total-items requires --items-out");
  }
  manifest.add_input(opt.tdi_report);
  manifest.add_input(opt.supply_plan);
  if (!opt.cluster_config.empty()) manifest.add_input(opt.cluster_config);

  auto tdi_in = open_input(opt.tdi_report);
  auto rows = read_tdi_report_csv(tdi_in);
  auto plan_in = open_input(opt.supply_plan);
  const auto named = read_plan_csv(plan_in);

  std::string sample = opt.sample;
  if (sample.empty()) {
    std::vector<std::string> samples;
    for (const auto& r : rows) samples.push_back(r.sample);
    std::sort(samples.begin(), samples.end());
    samples.erase(std::unique(samples.begin(), samples.end()), samples.end());
    if (std::find(samples.begin(), samples.end(), "D7") != samples.end()) {
      sample = "D7";
    } else if (samples.size() == 1) {
      sample = samples.front();
    } else {
      throw UsageError("TDI report holds several samples; choose one with --sample");
    }
  }
  std::map<std::string, double> by_branch;
  for (const auto& r : rows) {
    if (r.sample != sample) continue;
    if (!by_branch.emplace(r.branch_id, r.tdi).second) {
      throw Error(ErrorCode::MalformedRow, "duplicate branch " + r.branch_id + " in TDI report");
    }
  }
  if (by_branch.size() != named.branch_ids.size()) {
    throw Error(ErrorCode::BranchSetMismatch, "TDI report and supply plan cover different branches");
  }
  std::vector<double> tdis;
  for (const auto& id : named.branch_ids) {
    auto it = by_branch.find(id);
    if (it == by_branch.end()) {
      throw Error(ErrorCode::BranchSetMismatch, "branch " + id + " has no TDI for " + sample);
    }
    tdis.push_back(it->second);
  }

  ClusterConfig config;
  if (!opt.cluster_config.empty()) {
    auto in = open_input(opt.cluster_config);
    config = read_cluster_config(in);
  } else {
    if (opt.clusters < 1) throw UsageError("--clusters must be >= 1");
    if (opt.clusters > 1) config.boundaries = default_intervals(tdis, opt.clusters);
    config.increments = opt.increments.empty()
                            ? symmetric_increments(opt.clusters,
                                                   opt.step_mass / static_cast<double>(tdis.size()))
                            : parse_list(opt.increments);
    config.validate();
  }

  manifest.parameters["tdi_report"] = opt.tdi_report;
  manifest.parameters["supply_plan"] = opt.supply_plan;
  manifest.parameters["sample"] = sample;
  manifest.parameters["boundaries"] = config.boundaries;
  manifest.parameters["increments"] = config.increments;
  if (opt.total_items >= 0) manifest.parameters["total_items"] = opt.total_items;

  const auto assignment = classify(tdis, config);
  const auto updated = update_supply(named.plan, assignment, config);
  if (opt.out.empty()) {
    write_plan_csv(out, updated, named.branch_ids);
  } else {
    write_file(opt.out, [&](std::ostream& o) { write_plan_csv(o, updated, named.branch_ids); });
  }
  if (opt.total_items >= 0) {
    const auto items = discretize_plan(updated, opt.total_items);
    write_file(opt.items_out, [&](std::ostream& o) { write_items_csv(o, items, named.branch_ids); });
  }
  if (!opt.config_out.empty()) {
    write_file(opt.config_out, [&](std::ostream& o) { write_cluster_config(o, config); });
  }
  if (!manifest_path.empty()) manifest.write(manifest_path);
  return kExitOk;
}

MarketScenario load_scenario(const std::string& path, RunManifest& manifest) {
  manifest.add_input(path);
  auto in = open_input(path);
  return read_scenario(in);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed, RunManifest& manifest, std::ostream& out) {
  auto scenario = load_scenario(config_path, manifest);
  if (seed) scenario.config.seed = *seed;
  manifest.parameters["config"] = config_path;
  manifest.parameters["seed"] = scenario.config.seed;
  manifest.parameters["out_dir"] = out_dir;

  const auto plan = scenario.supply_plan();
  const auto items = allocate_items(plan, scenario.config.product_count, scenario.supply,
                                    scenario.config.seed);
  const auto dataset = simulate(scenario.config, items);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir / "sales.csv", [&](std::ostream& o) { write_sales_csv(o, dataset); });
  write_file(dir / "supply.csv", [&](std::ostream& o) { write_supply_csv(o, dataset); });
  write_file(dir / "truth.csv", [&](std::ostream& o) {
    o << "branch_id,weight,supply_share\n";
    for (std::size_t b = 0; b < dataset.branch_count(); ++b) {
      o << dataset.branches()[b] << ',' << csv::format_double(scenario.config.branch_weights[b])
        << ',' << csv::format_double(plan.shares[b]) << '\n';
    }
  });
  write_file(dir / "scenario.json", [&](std::ostream& o) { write_scenario(o, scenario); });
  manifest.write(dir / "manifest.json");
  out << dataset.transactions().size() << " sales rows for " << dataset.branch_count()
      << " branches and " << dataset.product_count() << " products\n";
  return kExitOk;
}

int cmd_loop(const std::string& config_path, const std::string& out_dir,
             std::optional<int> rounds, std::optional<std::uint64_t> seed, RunManifest& manifest,
             std::ostream& out) {
  auto scenario = load_scenario(config_path, manifest);
  if (rounds) scenario.rounds = *rounds;
  if (seed) scenario.config.seed = *seed;
  if (scenario.rounds < 1) throw UsageError("--rounds must be >= 1");
  manifest.parameters["config"] = config_path;
  manifest.parameters["rounds"] = scenario.rounds;
  manifest.parameters["seed"] = scenario.config.seed;
  manifest.parameters["out_dir"] = out_dir;

  const auto trajectory =
      closed_loop(scenario.config, scenario.supply_plan(), scenario.loop, scenario.rounds);
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const auto ids = make_branch_ids(scenario.config.branch_count());
  write_file(dir / "trajectory.csv",
             [&](std::ostream& o) { write_trajectory_csv(o, trajectory); });
  write_file(dir / "final_plan.csv",
             [&](std::ostream& o) { write_plan_csv(o, trajectory.rounds.back().plan, ids); });
  manifest.write(dir / "manifest.json");
  const auto& last = trajectory.rounds.back();
  out << "gap " << csv::format_double(trajectory.initial_gap) << " -> "
      << csv::format_double(last.gap) << " after " << last.round << " round(s), ratio "
      << csv::format_double(trajectory.initial_gap > 0 ? last.gap / trajectory.initial_gap : 0.0)
      << '\n';
  return kExitOk;
}

int cmd_replay(const std::string& manifest_path, std::ostream& out, std::ostream& err) {
  auto in = open_input(manifest_path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("manifest: ") + e.what());
  }
  if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
    throw UsageError("manifest has no argv");
  }
  const auto args = manifest["argv"].get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") throw UsageError("manifest replays itself");
  for (const auto& input : manifest.value("inputs", nlohmann::json::array())) {
    const auto path = input.at("path").get<std::string>();
    const auto expected = input.at("sha256").get<std::string>();
    if (sha256_file(path) != expected) {
      throw UsageError("input " + path + " changed since the manifest was written");
    }
  }
  return run(args, out, err);
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  auto in = open_input(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "sha256 unavailable");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

void RunManifest::add_input(const fs::path& path) { inputs.emplace_back(path.string(), sha256_file(path)); }

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "topdog";
  j["version"] = TOPDOG_VERSION;
  j["command"] = command;
  j["argv"] = argv;
  j["parameters"] = parameters;
  auto list = nlohmann::ordered_json::array();
  for (const auto& [path, digest] : inputs) list.push_back({{"path", path}, {"sha256", digest}});
  j["inputs"] = list;
  return j;
}

void RunManifest::write(const fs::path& path) const {
  write_file(path, [&](std::ostream& o) { o << to_json().dump(2) << '\n'; });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Top-Dog-Index toolkit: branch supply diagnostics and rebalancing", "topdog"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TOPDOG_VERSION));
  std::string manifest_path;

  DataOptions validate_data;
  auto* validate = app.add_subcommand("validate", "Check sales and supply files");
  validate_data.add_to(validate);
  validate->add_option("--manifest", manifest_path, "Write the run manifest here");

  DataOptions disc_data;
  std::uint64_t disc_seed = 1;
  int disc_days = kDefaultHorizon;
  std::string disc_out;
  auto* disc = app.add_subcommand("discrepancy", "Daily discrepancy curve of the naive estimator");
  disc_data.add_to(disc);
  disc->add_option("--seed", disc_seed, "Partition seed")->capture_default_str();
  disc->add_option("--days", disc_days, "Last measuring day")->capture_default_str();
  disc->add_option("--out", disc_out, "Write the CSV here instead of standard output");
  disc->add_option("--manifest", manifest_path, "Write the run manifest here");

  DataOptions tdi_data;
  TdiOptions tdi_opt;
  auto* tdi_cmd = app.add_subcommand("tdi", "Top-Dog-Index reports, robustness and baselines");
  tdi_data.add_to(tdi_cmd);
  tdi_cmd->add_option("--seed", tdi_opt.seed, "Partition seed")->capture_default_str();
  tdi_cmd->add_option("--dampening", tdi_opt.dampening, "Dampening C > 0")->capture_default_str();
  tdi_cmd->add_option("--out-dir", tdi_opt.out_dir, "Output directory")->required();
  tdi_cmd->add_option("--tiebreak", tdi_opt.tiebreak,
                      "Censored ordering: shared | remaining-fraction")
      ->capture_default_str();
  tdi_cmd->add_option("--phi-day", tdi_opt.phi_day, "Measuring day of the naive comparison matrix")
      ->capture_default_str();
  tdi_cmd->add_option("--baseline-seed", tdi_opt.baseline_seed, "Seed of the random baseline")
      ->capture_default_str();

  OptimizeOptions opt_opt;
  auto* optimize = app.add_subcommand("optimize", "Shift supply shares between TDI clusters");
  optimize->add_option("--tdi-report", opt_opt.tdi_report, "TDI report CSV")->required();
  optimize->add_option("--supply-plan", opt_opt.supply_plan, "Supply plan CSV (branch_id,share)")
      ->required();
  optimize->add_option("--sample", opt_opt.sample, "Sample of the TDI report to use (default D7)");
  auto* clusters = optimize->add_option("--clusters", opt_opt.clusters, "Number of clusters l")
                       ->capture_default_str();
  auto* increments =
      optimize->add_option("--increments", opt_opt.increments, "Comma-separated increments");
  optimize->add_option("--step-mass", opt_opt.step_mass,
                       "Default increments are +-step/|B| at the extreme clusters")
      ->capture_default_str();
  auto* cluster_config =
      optimize->add_option("--cluster-config", opt_opt.cluster_config, "Cluster config JSON");
  cluster_config->excludes(clusters)->excludes(increments);
  optimize->add_option("--total-items", opt_opt.total_items, "Also apportion this many items");
  optimize->add_option("--out", opt_opt.out, "Updated plan CSV (default standard output)");
  optimize->add_option("--items-out", opt_opt.items_out, "Apportioned items CSV");
  optimize->add_option("--config-out", opt_opt.config_out, "Write the cluster config used");
  optimize->add_option("--manifest", manifest_path, "Write the run manifest here");

  std::string sim_config;
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "Synthetic market with known demand");
  sim->add_option("--config", sim_config, "Scenario JSON")->required();
  sim->add_option("--out-dir", sim_out, "Output directory")->required();
  sim->add_option("--seed", sim_seed, "Override the scenario seed");

  std::string loop_config;
  std::string loop_out;
  std::optional<int> loop_rounds;
  std::optional<std::uint64_t> loop_seed;
  auto* loop = app.add_subcommand("loop", "Closed-loop supply rebalancing on the simulator");
  loop->add_option("--config", loop_config, "Scenario JSON")->required();
  loop->add_option("--rounds", loop_rounds, "Override the number of rounds");
  loop->add_option("--seed", loop_seed, "Override the scenario seed");
  loop->add_option("--out-dir", loop_out, "Output directory")->required();

  std::string replay_manifest;
  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("manifest", replay_manifest, "manifest.json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << TOPDOG_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  RunManifest manifest;
  manifest.argv = args;
  try {
    if (validate->parsed()) {
      manifest.command = "validate";
      return cmd_validate(validate_data, manifest_path, manifest, out);
    }
    if (disc->parsed()) {
      manifest.command = "discrepancy";
      return cmd_discrepancy(disc_data, disc_seed, disc_days, disc_out, manifest_path, manifest, out);
    }
    if (tdi_cmd->parsed()) {
      manifest.command = "tdi";
      return cmd_tdi(tdi_data, tdi_opt, manifest, out);
    }
    if (optimize->parsed()) {
      manifest.command = "optimize";
      return cmd_optimize(opt_opt, manifest_path, manifest, out);
    }
    if (sim->parsed()) {
      manifest.command = "simulate";
      return cmd_simulate(sim_config, sim_out, sim_seed, manifest, out);
    }
    if (loop->parsed()) {
      manifest.command = "loop";
      return cmd_loop(loop_config, loop_out, loop_rounds, loop_seed, manifest, out);
    }
    if (replay->parsed()) return cmd_replay(replay_manifest, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::Io:
      case ErrorCode::InvalidConfig:
      case ErrorCode::NonPositiveDampening:
        return kExitUsage;
      default:
        return kExitDomain;
    }
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace topdog::cli
