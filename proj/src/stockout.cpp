#include "topdog/stockout.hpp"

#include <algorithm>
#include <ostream>

namespace topdog {

StockOutTable::StockOutTable(std::size_t branch_count,
                             std::vector<std::vector<StockOutEntry>> per_product)
    : branch_count_(branch_count) {
  offsets_.assign(1, 0);
  offsets_.reserve(per_product.size() + 1);
  for (auto& entries : per_product) {
    std::sort(entries.begin(), entries.end(),
              [](const StockOutEntry& a, const StockOutEntry& b) { return a.branch < b.branch; });
    entries_.insert(entries_.end(), entries.begin(), entries.end());
    offsets_.push_back(entries_.size());
  }
}

std::optional<StockOutDay> StockOutTable::theta(ProductIndex p, BranchIndex b) const {
  const auto entries = product(p);
  auto it = std::lower_bound(entries.begin(), entries.end(), b,
                             [](const StockOutEntry& e, BranchIndex v) { return e.branch < v; });
  if (it == entries.end() || it->branch != b) return std::nullopt;
  return it->theta;
}

std::vector<ProductIndex> StockOutTable::carried_products(BranchIndex b) const {
  std::vector<ProductIndex> out;
  for (ProductIndex p = 0; p < product_count(); ++p) {
    if (theta(p, b)) out.push_back(p);
  }
  return out;
}

StockOutTable compute_stockout_days(const Dataset& ds, CensoredTiebreak tiebreak) {
  std::vector<std::vector<StockOutEntry>> per_product(ds.product_count());
  for (ProductIndex p = 0; p < ds.product_count(); ++p) {
    const auto supply = ds.supply_of_product(p);
    const auto sales = ds.sales_of_product(p);
    auto& out = per_product[p];
    auto t = sales.begin();
    for (const auto& e : supply) {
      while (t != sales.end() && t->branch < e.branch) ++t;
      if (e.quantity <= 0) {
        while (t != sales.end() && t->branch == e.branch) ++t;
        continue;
      }
      std::int64_t cumulative = 0;
      std::optional<int> day;
      for (; t != sales.end() && t->branch == e.branch; ++t) {
        if (t->day > ds.horizon()) continue;
        cumulative += t->quantity;
        if (!day && cumulative >= e.quantity) day = t->day;
      }
      if (day) {
        out.push_back({e.branch, StockOutDay::sold_out(*day)});
      } else {
        const double key = tiebreak == CensoredTiebreak::RemainingFraction
                               ? static_cast<double>(e.quantity - cumulative) /
                                     static_cast<double>(e.quantity)
                               : 0.0;
        out.push_back({e.branch, StockOutDay::censored(key)});
      }
    }
  }
  return StockOutTable(ds.branch_count(), std::move(per_product));
}

void write_stockout_csv(std::ostream& out, const StockOutTable& table, const Dataset& ds) {
  out << "product_id,branch_id,theta\n";
  for (ProductIndex p = 0; p < table.product_count(); ++p) {
    for (const auto& e : table.product(p)) {
      out << ds.products()[p] << ',' << ds.branches()[e.branch] << ',';
      if (e.theta.is_censored()) {
        out << "CENSORED";
      } else {
        out << e.theta.day();
      }
      out << '\n';
    }
  }
}

}  // namespace topdog
