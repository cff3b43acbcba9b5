#ifndef MECHLAB_SIMPLEX_HPP
#define MECHLAB_SIMPLEX_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mechlab/common.hpp"

namespace mechlab {

enum class Relation { LessEq, GreaterEq, Equal };

inline const char* relation_token(Relation rel) {
  switch (rel) {
    case Relation::LessEq: return "<=";
    case Relation::GreaterEq: return ">=";
    default: return "=";
  }
}

// One dense row: a . x  (rel)  b, over variables x >= 0.
struct LpConstraint {
  std::vector<double> a;
  Relation rel = Relation::LessEq;
  double b = 0.0;
};

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Optimal;
  double objective = 0.0;
  std::vector<double> x;
};

// Self-contained dense two-phase simplex, minimizing c . x subject to the
// given rows and x >= 0.  Bland's rule (lowest-index entering column, ties in
// the ratio test broken by lowest basic-variable index) guarantees
// termination on degenerate tableaus.  Problem sizes here are tiny -- a
// handful of allocations and prediction constraints -- so a dense tableau is
// the simplest thing that works.
class SimplexSolver {
 public:
  SimplexSolver(const std::vector<double>& c, const std::vector<LpConstraint>& rows)
      : n_(static_cast<int>(c.size())), m_(static_cast<int>(rows.size())) {
    for (const LpConstraint& row : rows)
      if (static_cast<int>(row.a.size()) != n_)
        throw std::invalid_argument("simplex: constraint dimension mismatch");

    // Column layout: structural | slack/surplus | artificial.
    int extras = 0, artificials = 0;
    for (const LpConstraint& row : rows) {
      if (row.rel != Relation::Equal) ++extras;
      if (row.rel != Relation::LessEq || row.b < 0.0) ++artificials;
    }
    first_artificial_ = n_ + extras;
    cols_ = first_artificial_ + artificials;
    tableau_.assign(m_, std::vector<double>(cols_ + 1, 0.0));
    basis_.assign(m_, -1);
    cost_.assign(cols_, 0.0);
    for (int j = 0; j < n_; ++j) cost_[j] = c[j];

    int next_extra = n_, next_art = first_artificial_;
    for (int r = 0; r < m_; ++r) {
      double sign = rows[r].b < 0.0 ? -1.0 : 1.0;  // keep rhs non-negative
      Relation rel = rows[r].rel;
      if (sign < 0.0 && rel != Relation::Equal)
        rel = rel == Relation::LessEq ? Relation::GreaterEq : Relation::LessEq;
      for (int j = 0; j < n_; ++j) tableau_[r][j] = sign * rows[r].a[j];
      tableau_[r][cols_] = sign * rows[r].b;
      if (rows[r].rel != Relation::Equal)
        tableau_[r][next_extra++] = (rel == Relation::LessEq) ? 1.0 : -1.0;
      if (rel == Relation::LessEq) {
        basis_[r] = next_extra - 1;  // slack starts basic
      } else {
        tableau_[r][next_art] = 1.0;  // artificial starts basic
        basis_[r] = next_art++;
      }
    }
    has_artificials_ = next_art > first_artificial_;
  }

  LpResult solve() {
    LpResult result;
    if (has_artificials_) {
      std::vector<double> phase1(cols_, 0.0);
      for (int j = first_artificial_; j < cols_; ++j) phase1[j] = 1.0;
      if (!optimize(phase1, /*allow_artificial=*/true))
        throw std::runtime_error("simplex: phase 1 unbounded");  // cannot happen: objective >= 0
      if (phase_objective(phase1) > 1e-7) {
        result.status = LpResult::Status::Infeasible;
        return result;
      }
      expel_artificials();
    }
    if (!optimize(cost_, /*allow_artificial=*/false)) {
      result.status = LpResult::Status::Unbounded;
      return result;
    }
    result.status = LpResult::Status::Optimal;
    result.x.assign(n_, 0.0);
    for (int r = 0; r < m_; ++r)
      if (basis_[r] < n_) result.x[basis_[r]] = tableau_[r][cols_];
    for (int j = 0; j < n_; ++j) result.objective += cost_[j] * result.x[j];
    return result;
  }

 private:
  double phase_objective(const std::vector<double>& cost) const {
    double total = 0.0;
    for (int r = 0; r < m_; ++r) total += cost[basis_[r]] * tableau_[r][cols_];
    return total;
  }

  // Reduced cost of column j under `cost`.
  double reduced_cost(const std::vector<double>& cost, int j) const {
    double z = cost[j];
    for (int r = 0; r < m_; ++r) z -= cost[basis_[r]] * tableau_[r][j];
    return z;
  }

  void pivot(int row, int col) {
    std::vector<double>& prow = tableau_[row];
    const double inv = 1.0 / prow[col];
    for (double& v : prow) v *= inv;
    prow[col] = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (r == row || tableau_[r][col] == 0.0) continue;
      const double factor = tableau_[r][col];
      for (int j = 0; j <= cols_; ++j) tableau_[r][j] -= factor * prow[j];
      tableau_[r][col] = 0.0;
    }
    basis_[row] = col;
  }

  // Returns false on unboundedness.
  bool optimize(const std::vector<double>& cost, bool allow_artificial) {
    const int limit = 10000 + 200 * (m_ + cols_);
    for (int iter = 0; iter < limit; ++iter) {
      int entering = -1;
      const int last = allow_artificial ? cols_ : first_artificial_;
      for (int j = 0; j < last; ++j) {  // Bland: lowest index first
        if (is_basic(j)) continue;
        if (reduced_cost(cost, j) < -kPivotEps) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      int leaving = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (tableau_[r][entering] <= kPivotEps) continue;
        const double ratio = tableau_[r][cols_] / tableau_[r][entering];
        if (leaving < 0 || ratio < best_ratio - kPivotEps ||
            (ratio < best_ratio + kPivotEps && basis_[r] < basis_[leaving])) {
          leaving = r;
          best_ratio = ratio;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
    throw std::runtime_error("simplex: iteration limit exceeded");
  }

  // After phase 1, pivot surviving artificials out of the basis where possible;
  // rows where no real column has a nonzero entry are redundant and keep a
  // zero-valued artificial that phase 2 never re-enters.
  void expel_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < first_artificial_) continue;
      int best = -1;
      for (int j = 0; j < first_artificial_; ++j) {
        if (is_basic(j)) continue;
        if (best < 0 || std::fabs(tableau_[r][j]) > std::fabs(tableau_[r][best])) best = j;
      }
      if (best >= 0 && std::fabs(tableau_[r][best]) > kPivotEps) pivot(r, best);
    }
  }

  bool is_basic(int col) const {
    for (int r = 0; r < m_; ++r)
      if (basis_[r] == col) return true;
    return false;
  }

  int n_, m_, cols_ = 0, first_artificial_ = 0;
  bool has_artificials_ = false;
  std::vector<std::vector<double>> tableau_;
  std::vector<int> basis_;
  std::vector<double> cost_;
};

inline LpResult solve_lp_min(const std::vector<double>& c, const std::vector<LpConstraint>& rows) {
  return SimplexSolver(c, rows).solve();
}

}  // namespace mechlab

#endif  // MECHLAB_SIMPLEX_HPP
