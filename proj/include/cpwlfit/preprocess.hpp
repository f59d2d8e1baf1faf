// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CPWLFIT_PREPROCESS_HPP
#define CPWLFIT_PREPROCESS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cpwlfit/cpwl.hpp"
#include "cpwlfit/dataset.hpp"

namespace cpwlfit {

/// The affine functions interpolating some (d+1)-subset of S with
/// vertex values perturbed by +/- eps in every sign pattern.
struct ExtremeAffineSet {
  std::vector<AffinePiece> functions;  // after dedup
  std::uint64_t raw_count = 0;         // before dedup
  std::uint64_t dedup_removed = 0;
  // Per kept function: subset indices and the sign pattern (bit r set
  // means +eps on the r-th subset point).
  std::vector<std::vector<int>> source_subset;
  std::vector<std::uint32_t> source_signs;
};

/// Per-point big-M values and variable-bound parameters.
struct BoundsBundle {
  int dim = 0;
  double eps = 0.0;
  int pieces_plus = 1;   // P^+
  int pieces_minus = 1;  // P^-

  std::vector<double> gmin;  // per point, min over A* of g(x_i)
  std::vector<double> gmax;
  std::vector<double> m_minus;  // M_i^-
  std::vector<double> m_plus;   // M_i^+

  std::vector<double> a_lo;  // per dimension r
  std::vector<double> a_hi;
  double b_lo = 0.0;
  double b_hi = 0.0;
  std::vector<double> a_prime;  // per dimension r
  double b_prime = 0.0;

  std::string to_json() const;
  static BoundsBundle from_json(const std::string& text);
};

/// Enumerates A*_eps(S), storing all functions. One LU factorization
/// per subset, reused across the 2^{d+1} right-hand sides.
/// Near-duplicates (componentwise within dedup_tol) are merged.
ExtremeAffineSet enumerate_extreme_affine(const DataSet& s, double eps,
                                          double dedup_tol = 1e-10,
                                          bool keep_sources = false);

/// Streaming visitor over all raw members of A*_eps(S) in
/// lexicographic (subset, sign) order. Used by the fold below.
void visit_extreme_affine(
    const DataSet& s, double eps,
    const std::function<void(const AffinePiece&)>& visit);

std::pair<std::vector<double>, std::vector<double>> pointwise_extrema(
    const ExtremeAffineSet& set, const DataSet& s);

/// M_i^c = min(P^c - 1, P^{not c}) * (gmax_i - gmin_i).
std::pair<std::vector<double>, std::vector<double>> compute_bigM(
    const std::vector<double>& gmin, const std::vector<double>& gmax,
    int pieces_plus, int pieces_minus);

struct CoefficientExtrema {
  std::vector<double> a_lo;
  std::vector<double> a_hi;
  double b_lo = 0.0;
  double b_hi = 0.0;
};

CoefficientExtrema coefficient_extrema(const ExtremeAffineSet& set);

/// Fills a_prime, b_prime and the big-M vectors from extrema already
/// stored in the bundle.
void derived_bounds(BoundsBundle* bundle);

/// M_{p,q}^c = M_p^c + M_q^c; diagonal entries are not meaningful.
std::vector<std::vector<double>> pairwise_bigM(const std::vector<double>& m);

/// One-pass computation of the whole bundle (pointwise extrema plus
/// coefficient extrema) without storing the function set. Parallelizes
/// over subset ranges; the min/max reductions make the result
/// independent of the thread count.
BoundsBundle compute_bounds(const DataSet& s, double eps, int pieces_plus,
                            int pieces_minus, int threads = 0);

}  // namespace cpwlfit

#endif  // CPWLFIT_PREPROCESS_HPP
