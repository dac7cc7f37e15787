// Copyright 2026 The coopfuse Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace coop {

// Hungarian algorithm (shortest augmenting paths with potentials) on a square
// cost matrix. Returns the column assigned to each row. O(n^3).
std::vector<int> SolveSquareAssignment(const Eigen::MatrixXd& cost);

// Rectangular assignment where +infinity marks a forbidden pair. The result
// has the largest possible number of admissible pairs and, among those, the
// smallest total cost. Pairs are returned sorted by row.
std::vector<std::pair<int, int>> SolveGatedAssignment(const Eigen::MatrixXd& cost);

}  // namespace coop
