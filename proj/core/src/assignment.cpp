#include "p2pbeam/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <limits>

namespace p2pbeam {

namespace {

double summed_cost(const Eigen::MatrixXd& cost, const std::vector<int>& row_to_col) {
  double total = 0.0;
  for (std::size_t r = 0; r < row_to_col.size(); ++r)
    if (row_to_col[r] >= 0) total += cost(static_cast<Eigen::Index>(r), row_to_col[r]);
  return total;
}

struct HungarianResult {
  std::vector<int> row_to_col;
  std::vector<double> u, v;  // duals: u[i] + v[j] <= a(i, j), v <= 0 (1-based)
};

// Rows <= cols.
HungarianResult hungarian(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
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
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return {std::move(row_to_col), std::move(u), std::move(v)};
}

struct Solved {
  Assignment assignment;
  Eigen::MatrixXd reduced;  // cost - u - v; any assignment using (r, c) costs >= optimum + reduced(r, c)
};

Solved solve_with_duals(const Eigen::MatrixXd& cost) {
  Solved out;
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  out.assignment.row_to_col.assign(static_cast<std::size_t>(rows), -1);
  out.reduced = Eigen::MatrixXd::Zero(rows, cols);
  if (rows == 0 || cols == 0) return out;
  if (rows <= cols) {
    auto h = hungarian(cost);
    out.assignment.row_to_col = std::move(h.row_to_col);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) out.reduced(r, c) = cost(r, c) - h.u[r + 1] - h.v[c + 1];
  } else {
    auto h = hungarian(cost.transpose());
    for (std::size_t c = 0; c < h.row_to_col.size(); ++c)
      out.assignment.row_to_col[static_cast<std::size_t>(h.row_to_col[c])] = static_cast<int>(c);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) out.reduced(r, c) = cost(r, c) - h.u[c + 1] - h.v[r + 1];
  }
  out.assignment.cost = summed_cost(cost, out.assignment.row_to_col);
  return out;
}

// Optimal assignment restricted to the given rows/cols; returns (row, col) pairs in cost indices.
std::pair<double, std::vector<std::pair<int, int>>> restricted_optimum(const Eigen::MatrixXd& cost,
                                                                      const std::vector<int>& rows,
                                                                      const std::vector<int>& cols) {
  std::pair<double, std::vector<std::pair<int, int>>> out{0.0, {}};
  if (rows.empty() || cols.empty()) return out;
  Eigen::MatrixXd sub(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = cost(rows[i], cols[j]);
  const Assignment a = solve_assignment(sub);
  out.first = a.cost;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (a.row_to_col[i] >= 0) out.second.emplace_back(rows[i], cols[static_cast<std::size_t>(a.row_to_col[i])]);
  return out;
}

}  // namespace

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  Assignment out;
  const auto rows = cost.rows();
  const auto cols = cost.cols();
  out.row_to_col.assign(static_cast<std::size_t>(rows), -1);
  if (rows == 0 || cols == 0) return out;
  if (rows <= cols) {
    out.row_to_col = hungarian(cost).row_to_col;
  } else {
    const std::vector<int> col_to_row = hungarian(cost.transpose()).row_to_col;
    for (std::size_t c = 0; c < col_to_row.size(); ++c) out.row_to_col[col_to_row[c]] = static_cast<int>(c);
  }
  out.cost = summed_cost(cost, out.row_to_col);
  return out;
}

Assignment solve_assignment_lexicographic(const Eigen::MatrixXd& cost, double tie_tol) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  const Solved solved = solve_with_duals(cost);
  const Assignment& best = solved.assignment;
  if (rows == 0 || cols == 0) return best;

  const int pairs_needed = std::min(rows, cols);
  const double bound = best.cost + tie_tol;
  // Pairs whose reduced cost exceeds this cannot be part of any near-optimal assignment.
  const double prune = tie_tol + 1e-12 * (1.0 + std::abs(best.cost));

  // The incumbent is always a near-optimal assignment agreeing with the rows fixed so far.
  std::vector<int> incumbent = best.row_to_col;
  std::vector<char> col_used(static_cast<std::size_t>(cols), 0);
  double fixed_cost = 0.0;
  int matched = 0;

  for (int r = 0; r < rows; ++r) {
    const int current = incumbent[static_cast<std::size_t>(r)];
    // An unmatched row sorts after every pair that starts with it.
    const int limit = current < 0 ? cols : current;
    for (int c = 0; c < limit; ++c) {
      if (col_used[static_cast<std::size_t>(c)] || solved.reduced(r, c) > prune) continue;
      std::vector<int> rem_rows, rem_cols;
      for (int rr = r + 1; rr < rows; ++rr) rem_rows.push_back(rr);
      for (int cc = 0; cc < cols; ++cc)
        if (cc != c && !col_used[static_cast<std::size_t>(cc)]) rem_cols.push_back(cc);
      if (matched + 1 + static_cast<int>(std::min(rem_rows.size(), rem_cols.size())) != pairs_needed) continue;
      const auto [rest, rest_pairs] = restricted_optimum(cost, rem_rows, rem_cols);
      if (fixed_cost + cost(r, c) + rest > bound) continue;
      for (int rr = r; rr < rows; ++rr) incumbent[static_cast<std::size_t>(rr)] = -1;
      incumbent[static_cast<std::size_t>(r)] = c;
      for (const auto& [rr, cc] : rest_pairs) incumbent[static_cast<std::size_t>(rr)] = cc;
      break;
    }
    const int chosen = incumbent[static_cast<std::size_t>(r)];
    if (chosen >= 0) {
      col_used[static_cast<std::size_t>(chosen)] = 1;
      fixed_cost += cost(r, chosen);
      ++matched;
    }
  }

  Assignment out;
  out.row_to_col = std::move(incumbent);
  out.cost = summed_cost(cost, out.row_to_col);
  return out;
}

}  // namespace p2pbeam
