#ifndef MECHLAB_VERTEXENUM_HPP
#define MECHLAB_VERTEXENUM_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "mechlab/simplex.hpp"

namespace mechlab {

namespace detail {

// Solve the square system M x = rhs by Gaussian elimination with partial
// pivoting; returns false when (numerically) singular.
inline bool solve_square(std::vector<std::vector<double>> M, std::vector<double> rhs,
                         std::vector<double>& x) {
  const int d = static_cast<int>(rhs.size());
  for (int col = 0; col < d; ++col) {
    int pivot = col;
    for (int r = col + 1; r < d; ++r)
      if (std::fabs(M[r][col]) > std::fabs(M[pivot][col])) pivot = r;
    if (std::fabs(M[pivot][col]) < 1e-11) return false;
    std::swap(M[pivot], M[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (int r = 0; r < d; ++r) {
      if (r == col || M[r][col] == 0.0) continue;
      const double f = M[r][col] / M[col][col];
      for (int j = col; j < d; ++j) M[r][j] -= f * M[col][j];
      rhs[r] -= f * rhs[col];
    }
  }
  x.assign(d, 0.0);
  for (int r = 0; r < d; ++r) x[r] = rhs[r] / M[r][r];
  return true;
}

}  // namespace detail

// Brute-force enumeration of the basic feasible solutions ("vertices") of
//   { x in R^dim : x >= 0, every row a.x (rel) b holds }.
// Every subset of dim constraint planes (rows taken at equality, plus the
// coordinate planes x_j = 0) is intersected; solutions feasible for the whole
// system are reported.  Exponential and meant as an independent oracle for
// small instances, which is exactly its job in the test suites.
inline void for_each_vertex(int dim, const std::vector<LpConstraint>& rows,
                            const std::function<void(const std::vector<double>&)>& visit) {
  const int total = static_cast<int>(rows.size()) + dim;  // rows, then axis planes
  std::vector<int> pick;
  std::vector<std::vector<double>> M(dim, std::vector<double>(dim));
  std::vector<double> rhs(dim), x;

  auto feasible = [&](const std::vector<double>& point) {
    for (double v : point)
      if (v < -1e-9 || !std::isfinite(v)) return false;
    for (const LpConstraint& row : rows) {
      double lhs = 0.0, scale = std::fabs(row.b);
      for (int j = 0; j < dim; ++j) {
        lhs += row.a[j] * point[j];
        scale = std::max(scale, std::fabs(row.a[j]));
      }
      const double tol = kFeasEps * std::max(1.0, scale);
      if (row.rel == Relation::LessEq && lhs > row.b + tol) return false;
      if (row.rel == Relation::GreaterEq && lhs < row.b - tol) return false;
      if (row.rel == Relation::Equal && std::fabs(lhs - row.b) > tol) return false;
    }
    return true;
  };

  std::function<void(int)> recurse = [&](int next) {
    if (static_cast<int>(pick.size()) == dim) {
      for (int r = 0; r < dim; ++r) {
        const int idx = pick[r];
        if (idx < static_cast<int>(rows.size())) {
          M[r] = rows[idx].a;
          rhs[r] = rows[idx].b;
        } else {
          std::fill(M[r].begin(), M[r].end(), 0.0);
          M[r][idx - rows.size()] = 1.0;
          rhs[r] = 0.0;
        }
      }
      if (detail::solve_square(M, rhs, x) && feasible(x)) visit(x);
      return;
    }
    for (int idx = next; idx < total; ++idx) {
      pick.push_back(idx);
      recurse(idx + 1);
      pick.pop_back();
    }
  };
  recurse(0);
}

}  // namespace mechlab

#endif  // MECHLAB_VERTEXENUM_HPP
