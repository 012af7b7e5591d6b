#pragma once

#include <vector>

#include <Eigen/Core>

namespace p2pbeam {

// Costs closer than this to the optimum are treated as ties.
constexpr double kAssignmentTieTolerance = 1e-9;

struct Assignment {
  std::vector<int> row_to_col;  // -1 when the row is left unmatched
  double cost = 0.0;            // summed over rows in ascending order
};

// Minimum-cost injective assignment of min(rows, cols) pairs (Hungarian method
// with potentials, O(n^2 m)).
Assignment solve_assignment(const Eigen::MatrixXd& cost);

// Same optimum, but among assignments within `tie_tol` of it returns the one
// whose (row, col) pair list, sorted by row, is lexicographically smallest.
Assignment solve_assignment_lexicographic(const Eigen::MatrixXd& cost,
                                          double tie_tol = kAssignmentTieTolerance);

}  // namespace p2pbeam
