#include "topdog/core_model.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "topdog/csv.hpp"
#include "topdog/error.hpp"

namespace topdog {

namespace {

// Assigns provisional ids in first-seen order; finish() renumbers them so
// that index order equals lexicographic id order.
class Interner {
 public:
  std::uint32_t intern(std::string_view id) {
    auto it = index_.find(id);
    if (it != index_.end()) return it->second;
    const auto next = static_cast<std::uint32_t>(ids_.size());
    ids_.emplace_back(id);
    index_.emplace(ids_.back(), next);
    return next;
  }

  // Returns the sorted ids and fills `remap` (provisional -> final).
  std::vector<std::string> finish(std::vector<std::uint32_t>& remap) {
    std::vector<std::uint32_t> order(ids_.size());
    std::iota(order.begin(), order.end(), 0U);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return ids_[a] < ids_[b]; });
    remap.assign(ids_.size(), 0);
    std::vector<std::string> sorted;
    sorted.reserve(ids_.size());
    for (std::uint32_t rank = 0; rank < order.size(); ++rank) {
      remap[order[rank]] = rank;
      sorted.push_back(std::move(ids_[order[rank]]));
    }
    ids_.clear();
    index_.clear();
    return sorted;
  }

 private:
  std::vector<std::string> ids_;
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
};

std::string pair_locator(const Dataset& ds, ProductIndex p, BranchIndex b) {
  return "product=" + ds.products()[p] + " branch=" + ds.branches()[b];
}

std::string sales_locator(const Dataset& ds, const Transaction& t) {
  return "sales " + pair_locator(ds, t.product, t.branch) + " day=" + std::to_string(t.day);
}

[[noreturn]] void malformed(std::string_view file, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedRow,
              std::string(file) + " line " + std::to_string(line) + ": " + what);
}

bool header_is(const std::vector<std::string_view>& fields,
               std::initializer_list<std::string_view> expected) {
  return fields.size() == expected.size() &&
         std::equal(fields.begin(), fields.end(), expected.begin());
}

}  // namespace

Dataset Dataset::from_parts(std::vector<std::string> branches, std::vector<std::string> products,
                            std::vector<SupplyEntry> supply,
                            std::vector<Transaction> transactions, int horizon) {
  Dataset ds;
  ds.branches_ = std::move(branches);
  ds.products_ = std::move(products);
  ds.horizon_ = horizon;

  std::sort(supply.begin(), supply.end(), [](const SupplyEntry& a, const SupplyEntry& b) {
    return std::tie(a.product, a.branch, a.quantity) < std::tie(b.product, b.branch, b.quantity);
  });
  ds.supply_ = std::move(supply);

  std::sort(transactions.begin(), transactions.end(),
            [](const Transaction& a, const Transaction& b) {
              return std::tie(a.product, a.branch, a.day) < std::tie(b.product, b.branch, b.day);
            });
  std::vector<Transaction> merged;
  merged.reserve(transactions.size());
  for (const auto& t : transactions) {
    if (!merged.empty() && merged.back().product == t.product && merged.back().branch == t.branch &&
        merged.back().day == t.day) {
      merged.back().quantity += t.quantity;
    } else {
      merged.push_back(t);
    }
  }
  ds.transactions_ = std::move(merged);
  ds.build_offsets();
  return ds;
}

Dataset Dataset::from_records(std::span<const SupplyRecord> supply,
                              std::span<const SalesRecord> sales, int horizon) {
  Interner branch_ids;
  Interner product_ids;
  std::vector<SupplyEntry> entries;
  entries.reserve(supply.size());
  for (const auto& r : supply) {
    const auto p = product_ids.intern(r.product_id);
    const auto b = branch_ids.intern(r.branch_id);
    entries.push_back({p, b, r.quantity});
  }
  std::vector<Transaction> transactions;
  transactions.reserve(sales.size());
  for (const auto& r : sales) {
    const auto p = product_ids.intern(r.product_id);
    const auto b = branch_ids.intern(r.branch_id);
    transactions.push_back({p, b, r.day, r.quantity});
  }
  std::vector<std::uint32_t> branch_remap;
  std::vector<std::uint32_t> product_remap;
  auto branches = branch_ids.finish(branch_remap);
  auto products = product_ids.finish(product_remap);
  for (auto& e : entries) {
    e.product = product_remap[e.product];
    e.branch = branch_remap[e.branch];
  }
  for (auto& t : transactions) {
    t.product = product_remap[t.product];
    t.branch = branch_remap[t.branch];
  }
  return from_parts(std::move(branches), std::move(products), std::move(entries),
                    std::move(transactions), horizon);
}

void Dataset::build_offsets() {
  supply_offsets_.assign(products_.size() + 1, 0);
  for (const auto& e : supply_) ++supply_offsets_[e.product + 1];
  std::partial_sum(supply_offsets_.begin(), supply_offsets_.end(), supply_offsets_.begin());
  sales_offsets_.assign(products_.size() + 1, 0);
  for (const auto& t : transactions_) ++sales_offsets_[t.product + 1];
  std::partial_sum(sales_offsets_.begin(), sales_offsets_.end(), sales_offsets_.begin());
}

std::span<const SupplyEntry> Dataset::supply_of_product(ProductIndex p) const {
  return std::span<const SupplyEntry>(supply_).subspan(supply_offsets_[p],
                                                       supply_offsets_[p + 1] - supply_offsets_[p]);
}

std::span<const Transaction> Dataset::sales_of_product(ProductIndex p) const {
  return std::span<const Transaction>(transactions_)
      .subspan(sales_offsets_[p], sales_offsets_[p + 1] - sales_offsets_[p]);
}

std::int64_t Dataset::supply_quantity(ProductIndex p, BranchIndex b) const {
  const auto entries = supply_of_product(p);
  auto it = std::lower_bound(entries.begin(), entries.end(), b,
                             [](const SupplyEntry& e, BranchIndex v) { return e.branch < v; });
  return it != entries.end() && it->branch == b ? it->quantity : 0;
}

std::optional<BranchIndex> Dataset::find_branch(std::string_view id) const {
  auto it = std::lower_bound(branches_.begin(), branches_.end(), id);
  if (it == branches_.end() || *it != id) return std::nullopt;
  return static_cast<BranchIndex>(it - branches_.begin());
}

std::optional<ProductIndex> Dataset::find_product(std::string_view id) const {
  auto it = std::lower_bound(products_.begin(), products_.end(), id);
  if (it == products_.end() || *it != id) return std::nullopt;
  return static_cast<ProductIndex>(it - products_.begin());
}

ValidationReport validate_dataset(const Dataset& ds) {
  ValidationReport report;
  auto add = [&](Severity severity, std::string locator, std::string message) {
    (severity == Severity::Error ? report.error_count : report.warning_count)++;
    report.issues.push_back({severity, std::move(locator), std::move(message)});
  };

  if (ds.horizon() < 1) {
    add(Severity::Error, "dataset", "horizon " + std::to_string(ds.horizon()) + " < 1");
  }

  std::vector<std::int64_t> branch_supply(ds.branch_count(), 0);
  std::vector<std::int64_t> product_supply(ds.product_count(), 0);
  std::vector<bool> branch_in_supply(ds.branch_count(), false);
  std::vector<bool> product_in_supply(ds.product_count(), false);
  const auto& supply = ds.supply();
  for (std::size_t i = 0; i < supply.size(); ++i) {
    const auto& e = supply[i];
    branch_in_supply[e.branch] = true;
    product_in_supply[e.product] = true;
    const auto loc = "supply " + pair_locator(ds, e.product, e.branch);
    if (e.quantity < 0) add(Severity::Error, loc, "negative quantity " + std::to_string(e.quantity));
    if (i > 0 && supply[i - 1].product == e.product && supply[i - 1].branch == e.branch) {
      add(Severity::Error, loc, "duplicate supply record");
    }
    branch_supply[e.branch] += std::max<std::int64_t>(e.quantity, 0);
    product_supply[e.product] += std::max<std::int64_t>(e.quantity, 0);
  }

  for (ProductIndex p = 0; p < ds.product_count(); ++p) {
    const auto sales = ds.sales_of_product(p);
    std::size_t i = 0;
    while (i < sales.size()) {
      const BranchIndex b = sales[i].branch;
      std::int64_t sold = 0;
      for (; i < sales.size() && sales[i].branch == b; ++i) {
        const auto& t = sales[i];
        if (t.day < 1) add(Severity::Error, sales_locator(ds, t), "day < 1");
        if (t.day > ds.horizon()) {
          add(Severity::Error, sales_locator(ds, t),
              "day exceeds horizon " + std::to_string(ds.horizon()));
        }
        if (t.quantity < 1) add(Severity::Error, sales_locator(ds, t), "quantity < 1");
        sold += t.quantity;
      }
      const auto entries = ds.supply_of_product(p);
      const bool known = std::any_of(entries.begin(), entries.end(),
                                     [b](const SupplyEntry& e) { return e.branch == b; });
      if (!known) {
        add(Severity::Error, "sales " + pair_locator(ds, p, b), "pair absent from supply table");
      } else if (sold > ds.supply_quantity(p, b)) {
        add(Severity::Error, "sales " + pair_locator(ds, p, b),
            "sold " + std::to_string(sold) + " exceeds supply " +
                std::to_string(ds.supply_quantity(p, b)));
      }
    }
  }

  for (BranchIndex b = 0; b < ds.branch_count(); ++b) {
    if (!branch_in_supply[b]) {
      add(Severity::Error, "branch=" + ds.branches()[b], "branch absent from supply table");
    } else if (branch_supply[b] == 0) {
      add(Severity::Warning, "branch=" + ds.branches()[b],
          "zero total supply; branch contributes nothing");
    }
  }
  for (ProductIndex p = 0; p < ds.product_count(); ++p) {
    if (!product_in_supply[p]) {
      add(Severity::Error, "product=" + ds.products()[p], "product absent from supply table");
    } else if (product_supply[p] == 0) {
      add(Severity::Warning, "product=" + ds.products()[p], "zero total supply");
    }
  }
  return report;
}

void write_report(std::ostream& out, const ValidationReport& report) {
  for (const auto& issue : report.issues) {
    out << (issue.severity == Severity::Error ? "error" : "warning") << ": " << issue.locator
        << ": " << issue.message << '\n';
  }
  out << report.error_count << " error(s), " << report.warning_count << " warning(s)\n";
}

std::optional<int> parse_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  const auto y = csv::parse_int<int>(text.substr(0, 4));
  const auto m = csv::parse_int<unsigned>(text.substr(5, 2));
  const auto d = csv::parse_int<unsigned>(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{*m},
                                        std::chrono::day{*d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

RawTables read_tables(std::istream& sales_in, std::istream& supply_in, std::istream* launch_in) {
  std::vector<std::string_view> fields;
  RawTables tables;

  {
    csv::Reader reader(supply_in);
    if (!reader.next(fields) || !header_is(fields, {"product_id", "branch_id", "quantity"})) {
      malformed("supply", reader.line_number(), "expected header product_id,branch_id,quantity");
    }
    while (reader.next(fields)) {
      if (fields.size() != 3) malformed("supply", reader.line_number(), "expected 3 columns");
      const auto qty = csv::parse_int<std::int64_t>(fields[2]);
      if (!qty || *qty < 0) {
        malformed("supply", reader.line_number(), "quantity must be an integer >= 0");
      }
      if (fields[0].empty() || fields[1].empty()) {
        malformed("supply", reader.line_number(), "empty id");
      }
      tables.supply.push_back({std::string(fields[0]), std::string(fields[1]), *qty});
    }
  }

  std::unordered_map<std::string, int> launch;
  if (launch_in != nullptr) {
    csv::Reader reader(*launch_in);
    if (!reader.next(fields) || !header_is(fields, {"product_id", "launch_date"})) {
      malformed("launch dates", reader.line_number(), "expected header product_id,launch_date");
    }
    while (reader.next(fields)) {
      if (fields.size() != 2) malformed("launch dates", reader.line_number(), "expected 2 columns");
      const auto date = parse_iso_date(fields[1]);
      if (!date) malformed("launch dates", reader.line_number(), "invalid ISO-8601 date");
      launch[std::string(fields[0])] = *date;
    }
  }

  csv::Reader reader(sales_in);
  bool calendar = false;
  if (!reader.next(fields)) {
    malformed("sales", reader.line_number(), "missing header");
  } else if (header_is(fields, {"product_id", "branch_id", "date", "quantity"})) {
    calendar = true;
    if (launch_in == nullptr) {
      malformed("sales", reader.line_number(), "date column requires a launch-date sidecar");
    }
  } else if (!header_is(fields, {"product_id", "branch_id", "day", "quantity"})) {
    malformed("sales", reader.line_number(), "expected header product_id,branch_id,day,quantity");
  }
  while (reader.next(fields)) {
    if (fields.size() != 4) malformed("sales", reader.line_number(), "expected 4 columns");
    int day = 0;
    if (calendar) {
      const auto date = parse_iso_date(fields[2]);
      if (!date) malformed("sales", reader.line_number(), "invalid ISO-8601 date");
      auto it = launch.find(std::string(fields[0]));
      if (it == launch.end()) malformed("sales", reader.line_number(), "no launch date for product");
      day = *date - it->second + 1;
    } else {
      const auto parsed = csv::parse_int<int>(fields[2]);
      if (!parsed) malformed("sales", reader.line_number(), "day must be an integer");
      day = *parsed;
    }
    if (day < 1) malformed("sales", reader.line_number(), "day must be >= 1");
    const auto qty = csv::parse_int<std::int64_t>(fields[3]);
    if (!qty || *qty < 1) malformed("sales", reader.line_number(), "quantity must be an integer >= 1");
    tables.sales.push_back({std::string(fields[0]), std::string(fields[1]), day, *qty});
  }
  return tables;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return in;
}

}  // namespace

RawTables read_table_files(const std::filesystem::path& sales_path,
                           const std::filesystem::path& supply_path,
                           const std::optional<std::filesystem::path>& launch_dates) {
  auto sales = open_input(sales_path);
  auto supply = open_input(supply_path);
  if (launch_dates) {
    auto launch = open_input(*launch_dates);
    return read_tables(sales, supply, &launch);
  }
  return read_tables(sales, supply, nullptr);
}

Dataset build_dataset(const RawTables& tables, int horizon) {
  auto full = Dataset::from_records(tables.supply, tables.sales, horizon);

  const auto& entries = full.supply();
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].product == entries[i - 1].product && entries[i].branch == entries[i - 1].branch) {
      throw Error(ErrorCode::MalformedRow,
                  "duplicate supply record " + pair_locator(full, entries[i].product, entries[i].branch));
    }
  }

  // Oversale is judged on every recorded sale; the dataset itself keeps only
  // the analysis window 1..H.
  std::vector<Transaction> in_window;
  in_window.reserve(full.transactions().size());
  for (ProductIndex p = 0; p < full.product_count(); ++p) {
    const auto sold = full.sales_of_product(p);
    const auto carried = full.supply_of_product(p);
    auto e = carried.begin();
    std::size_t i = 0;
    while (i < sold.size()) {
      const BranchIndex b = sold[i].branch;
      std::int64_t total = 0;
      for (; i < sold.size() && sold[i].branch == b; ++i) {
        total += sold[i].quantity;
        if (sold[i].day <= horizon) in_window.push_back(sold[i]);
      }
      while (e != carried.end() && e->branch < b) ++e;
      if (e == carried.end() || e->branch != b) {
        throw Error(ErrorCode::UnknownPair, "sales reference " + pair_locator(full, p, b) +
                                                " which is absent from the supply table");
      }
      if (total > e->quantity) {
        throw Error(ErrorCode::OversoldProduct,
                    pair_locator(full, p, b) + " sold " + std::to_string(total) +
                        " > supplied " + std::to_string(e->quantity));
      }
    }
  }
  // Every id now appears in the supply table, so the id sets are unchanged.
  return Dataset::from_parts(full.branches(), full.products(), full.supply(), std::move(in_window),
                             horizon);
}

Dataset parse_dataset(std::istream& sales, std::istream& supply, const LoadOptions& options,
                      std::istream* launch_dates) {
  return build_dataset(read_tables(sales, supply, launch_dates), options.horizon);
}

Dataset load_dataset(const std::filesystem::path& sales_path,
                     const std::filesystem::path& supply_path, const LoadOptions& options) {
  return build_dataset(read_table_files(sales_path, supply_path, options.launch_dates),
                       options.horizon);
}

void write_sales_csv(std::ostream& out, const Dataset& ds) {
  out << "product_id,branch_id,day,quantity\n";
  for (const auto& t : ds.transactions()) {
    out << ds.products()[t.product] << ',' << ds.branches()[t.branch] << ',' << t.day << ','
        << t.quantity << '\n';
  }
}

void write_supply_csv(std::ostream& out, const Dataset& ds) {
  out << "product_id,branch_id,quantity\n";
  for (const auto& e : ds.supply()) {
    out << ds.products()[e.product] << ',' << ds.branches()[e.branch] << ',' << e.quantity << '\n';
  }
}

}  // namespace topdog
