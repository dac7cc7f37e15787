// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#include "coop/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coop {

std::vector<int> SolveSquareAssignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

std::vector<std::pair<int, int>> SolveGatedAssignment(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) return {};

  double span = 0.0;
  bool any = false;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (std::isfinite(cost(i, j))) {
        span = std::max(span, std::abs(cost(i, j)));
        any = true;
      }
    }
  }
  if (!any) return {};

  // Every non-admissible slot costs more than any complete set of admissible
  // pairs could save, so cardinality is maximized before cost.
  const int n = std::max(rows, cols);
  const double penalty = (2.0 * span + 1.0) * (n + 1);
  Eigen::MatrixXd square = Eigen::MatrixXd::Constant(n, n, penalty);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (std::isfinite(cost(i, j))) square(i, j) = cost(i, j);
    }
  }
  const std::vector<int> assign = SolveSquareAssignment(square);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < rows; ++i) {
    const int j = assign[i];
    if (j >= 0 && j < cols && std::isfinite(cost(i, j))) pairs.emplace_back(i, j);
  }
  return pairs;
}

}  // namespace coop
