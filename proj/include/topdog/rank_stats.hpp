#pragma once

#include <span>
#include <vector>

namespace topdog {

// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of the average ranks. NaN when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace topdog
