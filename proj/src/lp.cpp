// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpwlfit/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "cpwlfit/error.hpp"

namespace cpwlfit {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;

// Tableau simplex on the standard form min c'y, Ay = b, y >= 0 with
// b >= 0, starting from an identity basis of artificials. Bland's rule
// throughout; the problems handled here are tiny, so robustness beats
// speed.
struct Tableau {
  int rows;
  int cols;                       // structural + artificial
  std::vector<std::vector<double>> a;  // rows x cols
  std::vector<double> b;
  std::vector<int> basis;  // column index basic in each row

  bool price_and_pivot(const std::vector<double>& cost, double* obj,
                       std::vector<double>* reduced) {
    // One simplex iteration; returns false when optimal.
    // Compute duals via basis costs, then reduced costs directly
    // against the maintained (already pivoted) tableau: in tableau
    // form, reduced cost = cost_j - sum_i cost_basis(i) * a[i][j].
    for (int j = 0; j < cols; ++j) {
      double r = cost[j];
      for (int i = 0; i < rows; ++i) r -= cost[basis[i]] * a[i][j];
      (*reduced)[j] = r;
    }
    int enter = -1;
    for (int j = 0; j < cols; ++j) {
      if ((*reduced)[j] < -kPivotTol) {
        enter = j;  // Bland: smallest index
        break;
      }
    }
    if (enter < 0) return false;
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows; ++i) {
      if (a[i][enter] > kPivotTol) {
        double ratio = b[i] / a[i][enter];
        if (ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol &&
             (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) {
      *obj = -std::numeric_limits<double>::infinity();
      return false;  // unbounded
    }
    pivot(leave, enter);
    return true;
  }

  void pivot(int row, int col) {
    double p = a[row][col];
    for (int j = 0; j < cols; ++j) a[row][j] /= p;
    b[row] /= p;
    for (int i = 0; i < rows; ++i) {
      if (i == row) continue;
      double factor = a[i][col];
      if (factor == 0.0) continue;
      for (int j = 0; j < cols; ++j) a[i][j] -= factor * a[row][j];
      b[i] -= factor * b[row];
    }
    basis[row] = col;
  }
};

}  // namespace

LPResult solve_dense_lp(const DenseLP& lp) {
  int n = lp.num_vars;
  int m = static_cast<int>(lp.rows.size());
  if (static_cast<int>(lp.objective.size()) != n)
    throw validation_error("objective length mismatch");

  // Free variables are split: x = xp - xm. Columns:
  //   [0, n)      xp
  //   [n, 2n)     xm
  //   [2n, 2n+m)  slack/surplus (zero column for EQ rows)
  //   [2n+m, ...) artificials (added as needed)
  int slack_base = 2 * n;
  int art_base = 2 * n + m;

  Tableau t;
  t.rows = m;
  t.cols = art_base;  // artificials appended below
  t.a.assign(m, std::vector<double>(art_base, 0.0));
  t.b.assign(m, 0.0);
  t.basis.assign(m, -1);

  std::vector<int> art_of_row(m, -1);
  for (int i = 0; i < m; ++i) {
    const DenseRow& row = lp.rows[i];
    if (static_cast<int>(row.coef.size()) != n)
      throw validation_error("row length mismatch");
    double sign = 1.0;
    RowSense sense = row.sense;
    double rhs = row.rhs;
    if (rhs < 0.0) {
      sign = -1.0;
      rhs = -rhs;
      if (sense == RowSense::LE) sense = RowSense::GE;
      else if (sense == RowSense::GE) sense = RowSense::LE;
    }
    for (int j = 0; j < n; ++j) {
      t.a[i][j] = sign * row.coef[j];
      t.a[i][n + j] = -sign * row.coef[j];
    }
    t.b[i] = rhs;
    if (sense == RowSense::LE) {
      t.a[i][slack_base + i] = 1.0;
      t.basis[i] = slack_base + i;
    } else if (sense == RowSense::GE) {
      t.a[i][slack_base + i] = -1.0;
      art_of_row[i] = i;
    } else {
      art_of_row[i] = i;
    }
  }
  int num_art = 0;
  std::vector<int> art_col_of_row(m, -1);
  for (int i = 0; i < m; ++i)
    if (art_of_row[i] >= 0) art_col_of_row[i] = art_base + num_art++;
  t.cols = art_base + num_art;
  for (int i = 0; i < m; ++i) {
    t.a[i].resize(t.cols, 0.0);
    if (art_col_of_row[i] >= 0) {
      t.a[i][art_col_of_row[i]] = 1.0;
      t.basis[i] = art_col_of_row[i];
    }
  }

  LPResult result;
  std::vector<double> reduced(t.cols, 0.0);

  // Phase 1: minimize the sum of artificials.
  if (num_art > 0) {
    std::vector<double> cost1(t.cols, 0.0);
    for (int j = art_base; j < t.cols; ++j) cost1[j] = 1.0;
    double obj = 0.0;
    int guard = 0;
    while (t.price_and_pivot(cost1, &obj, &reduced)) {
      if (++guard > 20000)
        throw numerical_error("simplex phase 1 iteration limit");
    }
    double phase1 = 0.0;
    for (int i = 0; i < m; ++i)
      if (t.basis[i] >= art_base) phase1 += t.b[i];
    if (phase1 > 1e-7) {
      result.status = LPStatus::Infeasible;
      return result;
    }
    // Drive remaining artificials out of the basis when possible.
    for (int i = 0; i < m; ++i) {
      if (t.basis[i] >= art_base) {
        int target = -1;
        for (int j = 0; j < art_base; ++j) {
          if (std::abs(t.a[i][j]) > kPivotTol) {
            target = j;
            break;
          }
        }
        if (target >= 0) t.pivot(i, target);
        // A fully zero row stays on its artificial at value ~0.
      }
    }
  }

  // Phase 2: original objective, artificials priced out.
  std::vector<double> cost2(t.cols, 0.0);
  for (int j = 0; j < n; ++j) {
    cost2[j] = lp.objective[j];
    cost2[n + j] = -lp.objective[j];
  }
  for (int j = art_base; j < t.cols; ++j)
    cost2[j] = 1e12;  // keep leftover degenerate artificials at zero
  double obj = 0.0;
  int guard = 0;
  while (t.price_and_pivot(cost2, &obj, &reduced)) {
    if (++guard > 20000)
      throw numerical_error("simplex phase 2 iteration limit");
  }
  if (obj == -std::numeric_limits<double>::infinity()) {
    result.status = LPStatus::Unbounded;
    return result;
  }

  std::vector<double> y(t.cols, 0.0);
  for (int i = 0; i < m; ++i) {
    if (t.b[i] < -kFeasTol)
      throw numerical_error("simplex produced negative basic value");
    y[t.basis[i]] = t.b[i];
  }
  result.x.assign(n, 0.0);
  result.objective = 0.0;
  for (int j = 0; j < n; ++j) {
    result.x[j] = y[j] - y[n + j];
    result.objective += lp.objective[j] * result.x[j];
  }
  result.status = LPStatus::Optimal;
  return result;
}

}  // namespace cpwlfit
