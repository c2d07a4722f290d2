#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace sfusion {

using WeightMatrix = std::vector<std::vector<std::int64_t>>;
using Pairing = std::vector<std::pair<std::size_t, std::size_t>>;

/// Maximum-total-weight one-to-one pairing of rows with columns.
///
/// `weights` is rows x cols; a weight of 0 forbids the pair, negative
/// weights are not allowed. Among pairings of equal total weight the result
/// favours pairs with lower (row, column) indices, so the output is fully
/// deterministic. Returned pairs are sorted by row. Runs the Hungarian
/// algorithm, O(max(rows, cols)^3).
Pairing max_weight_pairing(const WeightMatrix& weights, std::size_t cols);

}  // namespace sfusion
