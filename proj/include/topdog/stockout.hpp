#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "topdog/core_model.hpp"

namespace topdog {

// Day on which a branch sold its last item of a product, or CENSORED when
// supply was left at the horizon. CENSORED orders after every sold-out day.
// Censored values carry a key that orders them among themselves; under the
// default convention the key is 0 and all censored values tie.
class StockOutDay {
 public:
  static constexpr StockOutDay sold_out(int day) noexcept { return StockOutDay(false, day, 0.0); }
  static constexpr StockOutDay censored(double key = 0.0) noexcept {
    return StockOutDay(true, 0, key);
  }

  constexpr bool is_censored() const noexcept { return censored_; }
  constexpr int day() const noexcept { return day_; }
  constexpr double censored_key() const noexcept { return key_; }

  friend constexpr std::weak_ordering operator<=>(const StockOutDay& a,
                                                  const StockOutDay& b) noexcept {
    if (a.censored_ != b.censored_) return a.censored_ ? std::weak_ordering::greater
                                                       : std::weak_ordering::less;
    if (!a.censored_) return a.day_ <=> b.day_;
    if (a.key_ < b.key_) return std::weak_ordering::less;
    if (b.key_ < a.key_) return std::weak_ordering::greater;
    return std::weak_ordering::equivalent;
  }
  friend constexpr bool operator==(const StockOutDay& a, const StockOutDay& b) noexcept {
    return (a <=> b) == 0;
  }

 private:
  constexpr StockOutDay(bool censored, int day, double key) noexcept
      : censored_(censored), day_(day), key_(key) {}

  bool censored_;
  int day_;
  double key_;
};

enum class CensoredTiebreak {
  Shared,             // all censored entries tie
  RemainingFraction,  // more supply left over orders later (extension)
};

struct StockOutEntry {
  BranchIndex branch = 0;
  StockOutDay theta = StockOutDay::censored();
};

// theta_b(p) for every pair with S(b,p) > 0, grouped by product and sorted by
// branch within a product. The branches listed for p form B_p.
class StockOutTable {
 public:
  StockOutTable() = default;
  StockOutTable(std::size_t branch_count, std::vector<std::vector<StockOutEntry>> per_product);

  std::size_t branch_count() const noexcept { return branch_count_; }
  std::size_t product_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  std::span<const StockOutEntry> product(ProductIndex p) const {
    return std::span<const StockOutEntry>(entries_).subspan(offsets_[p], offsets_[p + 1] - offsets_[p]);
  }

  std::optional<StockOutDay> theta(ProductIndex p, BranchIndex b) const;

  // Products with S(b,p) > 0.
  std::vector<ProductIndex> carried_products(BranchIndex b) const;

 private:
  std::size_t branch_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<StockOutEntry> entries_;
};

StockOutTable compute_stockout_days(const Dataset& dataset,
                                    CensoredTiebreak tiebreak = CensoredTiebreak::Shared);

// CSV `product_id,branch_id,theta` with theta an integer or `CENSORED`.
void write_stockout_csv(std::ostream& out, const StockOutTable& table, const Dataset& dataset);

}  // namespace topdog
