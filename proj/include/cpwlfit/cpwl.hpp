// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CPWLFIT_CPWL_HPP
#define CPWLFIT_CPWL_HPP

#include <string>
#include <vector>

#include "cpwlfit/dataset.hpp"

namespace cpwlfit {

/// One affine function a^T x + b.
struct AffinePiece {
  std::vector<double> a;
  double b = 0.0;

  int dim() const { return static_cast<int>(a.size()); }
};

double eval_affine(const AffinePiece& p, const std::vector<double>& x);

/// Pointwise maximum of a nonempty list of affine pieces.
struct ConvexPWL {
  std::vector<AffinePiece> pieces;

  double eval(const std::vector<double>& x) const;
  /// Indices of all pieces within `tol` of the maximum at x.
  std::vector<int> argmax_set(const std::vector<double>& x, double tol) const;
};

/// f(x) = plus(x) - minus(x).
struct DCFunction {
  ConvexPWL plus;
  ConvexPWL minus;

  double eval(const std::vector<double>& x) const;

  std::string to_json() const;
  static DCFunction from_json(const std::string& text);
};

struct DCEvalResult {
  double value = 0.0;
  std::vector<int> plus_active;
  std::vector<int> minus_active;
};

/// Value plus the argmax index sets of both convex parts. Ties within
/// `tol` of the max are all included.
DCEvalResult eval_dc(const DCFunction& f, const std::vector<double>& x,
                     double tol = 1e-9);

struct FitReport {
  std::vector<double> errors;  // signed e_i = f(x_i) - z_i
  double max_abs_error = 0.0;
  double mean_abs_error = 0.0;
  double eps = 0.0;
  bool feasible = false;
  int worst_point = -1;

  std::string to_json() const;
};

/// Checks max_i |f(x_i) - z_i| <= eps + report_tol.
FitReport verify_eps_approx(const DCFunction& f, const DataSet& s, double eps,
                            double report_tol = 1e-6);

/// For each point, the sets J_i, K_i of pieces active within tol.
struct ActivityMap {
  std::vector<std::vector<int>> plus_active;   // J_i
  std::vector<std::vector<int>> minus_active;  // K_i
};

ActivityMap activity_map(const DCFunction& f, const DataSet& s, double tol = 1e-6);

struct WellBehavedReport {
  bool pass = false;
  // Distinct active pairs (plus piece, minus piece) and the number of
  // data points each pair function interpolates against z_i + e_i.
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> interpolation_counts;
  int required = 0;  // d+1
};

/// Every pair (j,k) active at some data point must interpolate at
/// least d+1 points of (x_i, z_i + e_i). Duplicate identical pieces
/// are treated as one logical piece.
WellBehavedReport check_well_behaved(const DCFunction& f, const DataSet& s,
                                     double tol = 1e-6);

/// True iff x lies in the simplex spanned by d+1 affinely independent
/// vertices (barycentric coordinates all >= -tol).
bool point_in_simplex(const std::vector<double>& x,
                      const std::vector<std::vector<double>>& verts,
                      double tol = 1e-9);

/// True iff the open segment (q1,q2) transversally crosses the
/// relative interior of the (d-1)-simplex spanned by `verts` (d
/// vertices in R^d). Coplanar contact counts as non-crossing.
bool segment_crosses_facet(const std::vector<double>& q1,
                           const std::vector<double>& q2,
                           const std::vector<std::vector<double>>& verts,
                           double tol = 1e-9);

}  // namespace cpwlfit

#endif  // CPWLFIT_CPWL_HPP
