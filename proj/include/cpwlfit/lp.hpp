// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CPWLFIT_LP_HPP
#define CPWLFIT_LP_HPP

#include <vector>

namespace cpwlfit {

// Small dense two-phase simplex for the handful-of-variables LPs used
// by the well-behaving transform and by oracle computations. All
// variables are free unless constrained by rows.

enum class RowSense { LE, GE, EQ };

struct DenseRow {
  std::vector<double> coef;
  RowSense sense = RowSense::LE;
  double rhs = 0.0;
};

struct DenseLP {
  int num_vars = 0;
  std::vector<double> objective;  // minimized
  std::vector<DenseRow> rows;
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPResult {
  LPStatus status = LPStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

LPResult solve_dense_lp(const DenseLP& lp);

}  // namespace cpwlfit

#endif  // CPWLFIT_LP_HPP
