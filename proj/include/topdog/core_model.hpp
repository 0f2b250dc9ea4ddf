#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace topdog {

using BranchIndex = std::uint32_t;
using ProductIndex = std::uint32_t;

inline constexpr int kDefaultHorizon = 60;

// Raw rows as they appear in the input files, before interning.
struct SupplyRecord {
  std::string product_id;
  std::string branch_id;
  std::int64_t quantity = 0;
};

struct SalesRecord {
  std::string product_id;
  std::string branch_id;
  int day = 0;  // relative to the product's first selling day
  std::int64_t quantity = 0;
};

struct SupplyEntry {
  ProductIndex product = 0;
  BranchIndex branch = 0;
  std::int64_t quantity = 0;

  friend bool operator==(const SupplyEntry&, const SupplyEntry&) = default;
};

// Total quantity sold of one product in one branch on one relative day.
struct Transaction {
  ProductIndex product = 0;
  BranchIndex branch = 0;
  int day = 0;
  std::int64_t quantity = 0;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

// Branches, products, supply S(b,p) and daily sales over a horizon of H days.
//
// Ids are interned in lexicographic order, supply is sorted by (product,
// branch) and transactions by (product, branch, day) with same-day rows
// summed, so two datasets built from permutations of the same rows compare
// equal. Construction does not enforce the domain invariants; use
// validate_dataset() or load_dataset() for that.
class Dataset {
 public:
  Dataset() = default;

  static Dataset from_records(std::span<const SupplyRecord> supply,
                              std::span<const SalesRecord> sales, int horizon);

  // Builds directly from interned data. Entries are canonicalized the same way
  // as in from_records().
  static Dataset from_parts(std::vector<std::string> branches, std::vector<std::string> products,
                            std::vector<SupplyEntry> supply,
                            std::vector<Transaction> transactions, int horizon);

  const std::vector<std::string>& branches() const noexcept { return branches_; }
  const std::vector<std::string>& products() const noexcept { return products_; }
  const std::vector<SupplyEntry>& supply() const noexcept { return supply_; }
  const std::vector<Transaction>& transactions() const noexcept { return transactions_; }
  int horizon() const noexcept { return horizon_; }

  std::size_t branch_count() const noexcept { return branches_.size(); }
  std::size_t product_count() const noexcept { return products_.size(); }

  std::span<const SupplyEntry> supply_of_product(ProductIndex p) const;
  std::span<const Transaction> sales_of_product(ProductIndex p) const;

  // S(b,p); zero when no record exists.
  std::int64_t supply_quantity(ProductIndex p, BranchIndex b) const;

  std::optional<BranchIndex> find_branch(std::string_view id) const;
  std::optional<ProductIndex> find_product(std::string_view id) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void build_offsets();

  std::vector<std::string> branches_;
  std::vector<std::string> products_;
  std::vector<SupplyEntry> supply_;
  std::vector<Transaction> transactions_;
  int horizon_ = kDefaultHorizon;
  std::vector<std::size_t> supply_offsets_;
  std::vector<std::size_t> sales_offsets_;
};

enum class Severity { Error, Warning };

struct ValidationIssue {
  Severity severity = Severity::Error;
  std::string locator;
  std::string message;
};

struct ValidationReport {
  std::size_t error_count = 0;
  std::size_t warning_count = 0;
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return error_count == 0; }
};

ValidationReport validate_dataset(const Dataset& dataset);

void write_report(std::ostream& out, const ValidationReport& report);

struct LoadOptions {
  int horizon = kDefaultHorizon;
  // Sidecar `product_id,launch_date`, required when the sales file carries a
  // `date` column instead of the relative `day` column.
  std::optional<std::filesystem::path> launch_dates;
};

// Rows of the input files after format checks only.
struct RawTables {
  std::vector<SupplyRecord> supply;
  std::vector<SalesRecord> sales;
};

// Throws Error{MalformedRow}. Calendar dates are converted to relative days.
RawTables read_tables(std::istream& sales, std::istream& supply, std::istream* launch_dates = nullptr);
RawTables read_table_files(const std::filesystem::path& sales_path,
                           const std::filesystem::path& supply_path,
                           const std::optional<std::filesystem::path>& launch_dates = std::nullopt);

// Checks oversale and unknown pairs on every row, then keeps the sales of
// days 1..horizon. Throws Error{MalformedRow | OversoldProduct | UnknownPair}.
Dataset build_dataset(const RawTables& tables, int horizon);

// Throws Error{MalformedRow | OversoldProduct | UnknownPair | Io}.
Dataset load_dataset(const std::filesystem::path& sales_path,
                     const std::filesystem::path& supply_path, const LoadOptions& options = {});

Dataset parse_dataset(std::istream& sales, std::istream& supply, const LoadOptions& options = {},
                      std::istream* launch_dates = nullptr);

void write_sales_csv(std::ostream& out, const Dataset& dataset);
void write_supply_csv(std::ostream& out, const Dataset& dataset);

// Days since 1970-01-01 for an ISO-8601 calendar date (YYYY-MM-DD).
std::optional<int> parse_iso_date(std::string_view text);

}  // namespace topdog
