// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CPWLFIT_WELLBEHAVE_HPP
#define CPWLFIT_WELLBEHAVE_HPP

#include <string>
#include <vector>

#include "cpwlfit/cpwl.hpp"
#include "cpwlfit/dataset.hpp"

namespace cpwlfit {

/// One active pair (j,k) of the DC representation, its pair function
/// f_{j,k} = f_j^+ - f_k^-, and the data points it interpolates
/// against the targets z_i + e_i.
struct PiecePair {
  int plus_index = 0;
  int minus_index = 0;
  AffinePiece function;
  std::vector<int> points;  // indices interpolated by this pair
};

struct NeighborEdge {
  int from_pair = 0;
  int to_pair = 0;
  int sign = +1;  // +1 when the shared boundary comes from f^+, -1 from f^-
};

struct PieceAssignment {
  std::vector<PiecePair> pairs;
  std::vector<NeighborEdge> edges;
  std::vector<double> targets;  // z_i + e_i
};

/// Pairs and neighbor structure from activity at the data points.
/// Fails if some point has empty activity (numerical breakdown).
PieceAssignment derive_assignment(const DCFunction& f, const DataSet& s,
                                  double tol = 1e-6);

struct TiltResult {
  AffinePiece piece;  // adjusted pair function (a*, b*)
  int active_count = 0;
  std::vector<int> new_points;  // indices newly interpolated
};

/// Tilts the pair function of `pair_index` toward a vertex of the
/// polyhedron of feasible adjustments, activating one inequality at a
/// time via small LPs, until min(d+1, n+m) constraints are active or
/// no further activation is possible.
TiltResult tilt_piece(const PieceAssignment& assign, int pair_index,
                      const DataSet& s);

struct TransformReport {
  DCFunction function;
  bool well_behaved = false;
  int tilt_count = 0;
  // Pairs left underdetermined because index coupling pinned them.
  std::vector<std::pair<int, int>> coupled_pairs;
};

/// Constructive well-behaving transform: repeatedly tilts
/// underdetermined pairs (ascending interpolation count, ties by pair
/// index) until every active pair interpolates >= d+1 points. The
/// result matches f at every data point.
TransformReport transform(const DCFunction& f, const DataSet& s, double eps,
                          double tol = 1e-6);

}  // namespace cpwlfit

#endif  // CPWLFIT_WELLBEHAVE_HPP
