#include "sfusion/assignment.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace sfusion {

namespace {

// Min-cost assignment of every row to a distinct column (rows <= cols).
// Classic potentials formulation; indices are 1-based internally.
std::vector<std::size_t> hungarian_min(const WeightMatrix& cost, std::size_t n, std::size_t m) {
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> u(n + 1, 0), v(m + 1, 0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      std::int64_t delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const std::int64_t cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Pairing max_weight_pairing(const WeightMatrix& weights, std::size_t cols) {
  const std::size_t rows = weights.size();
  if (rows == 0 || cols == 0) return {};

  // Lift each eligible weight so that the primary weight dominates and a
  // small per-cell bonus breaks ties toward low indices. The bonus total over
  // any pairing stays below one primary unit.
  const std::int64_t cells = static_cast<std::int64_t>(rows * cols);
  const std::int64_t scale = static_cast<std::int64_t>(std::min(rows, cols)) * cells + 1;
  std::int64_t max_lifted = 0;
  WeightMatrix lifted(rows, std::vector<std::int64_t>(cols, 0));
  for (std::size_t i = 0; i < rows; ++i) {
    if (weights[i].size() != cols) throw std::invalid_argument("ragged weight matrix");
    for (std::size_t j = 0; j < cols; ++j) {
      const std::int64_t w = weights[i][j];
      if (w < 0) throw std::invalid_argument("negative pairing weight");
      if (w == 0) continue;
      if (w > std::numeric_limits<std::int64_t>::max() / 8 / scale) {
        throw std::overflow_error("pairing weight too large");
      }
      lifted[i][j] = w * scale + (cells - static_cast<std::int64_t>(i * cols + j));
      max_lifted = std::max(max_lifted, lifted[i][j]);
    }
  }

  // Square it up with zero-weight padding and convert to costs.
  const std::size_t n = std::max(rows, cols);
  WeightMatrix cost(n, std::vector<std::int64_t>(n, max_lifted));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) cost[i][j] = max_lifted - lifted[i][j];
  }
  const auto row_to_col = hungarian_min(cost, n, n);

  Pairing out;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t j = row_to_col[i];
    if (j < cols && weights[i][j] > 0) out.emplace_back(i, j);
  }
  return out;
}

}  // namespace sfusion
