// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cpwlfit/dataset.hpp"
#include "cpwlfit/error.hpp"
#include "cpwlfit/lp.hpp"
#include "cpwlfit/preprocess.hpp"

using namespace cpwlfit;

namespace {

DataSet random_instance(int d, int n, std::uint64_t seed) {
  DataSet s;
  s.dim = d;
  s.name = "rand";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = u(rng);
    s.x.push_back(x);
    s.z.push_back(u(rng));
  }
  return s;
}

std::uint64_t choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Independent extrema oracle: for every (d+1)-subset, the min/max of
// a^T x_q + b over {|a^T x_s + b - z_s| <= eps, s in subset} via LP.
std::pair<double, double> lp_extrema_at(const DataSet& s,
                                        const std::vector<int>& subset,
                                        double eps, int q) {
  int d = s.dim;
  auto run = [&](double sign) {
    DenseLP lp;
    lp.num_vars = d + 1;
    lp.objective.assign(d + 1, 0.0);
    for (int r = 0; r < d; ++r) lp.objective[r] = sign * s.x[q][r];
    lp.objective[d] = sign;
    for (int idx : subset) {
      DenseRow lo, hi;
      lo.coef.assign(d + 1, 0.0);
      for (int r = 0; r < d; ++r) lo.coef[r] = s.x[idx][r];
      lo.coef[d] = 1.0;
      hi = lo;
      lo.sense = RowSense::GE;
      lo.rhs = s.z[idx] - eps;
      hi.sense = RowSense::LE;
      hi.rhs = s.z[idx] + eps;
      lp.rows.push_back(lo);
      lp.rows.push_back(hi);
    }
    LPResult r = solve_dense_lp(lp);
    REQUIRE(r.status == LPStatus::Optimal);
    return sign * r.objective;
  };
  // The LP minimizes, so sign -1 yields the maximum of a^T x_q + b.
  return {run(-1.0), run(1.0)};
}

}  // namespace

TEST_CASE("raw enumeration count matches the closed form") {
  for (int d : {1, 2}) {
    for (double eps : {0.0, 0.1}) {
      DataSet s = random_instance(d, 7, 100 + d);
      ExtremeAffineSet set = enumerate_extreme_affine(s, eps);
      std::uint64_t expect = choose(7, d + 1) << (d + 1);
      CHECK(set.raw_count == expect);
      if (eps > 0.0) {
        CHECK(set.dedup_removed == 0);
        CHECK(set.functions.size() == expect);
      } else {
        // All 2^{d+1} sign patterns coincide when eps = 0.
        CHECK(set.functions.size() == choose(7, d + 1));
      }
    }
  }
}

TEST_CASE("pointwise extrema agree with the subset LP oracle") {
  for (int d : {1, 2}) {
    DataSet s = random_instance(d, 6, 7 + d);
    double eps = 0.05;
    ExtremeAffineSet set = enumerate_extreme_affine(s, eps);
    auto [gmin, gmax] = pointwise_extrema(set, s);
    for (int q = 0; q < s.size(); ++q) {
      double lo = 1e300, hi = -1e300;
      std::vector<int> subset(d + 1);
      for (int i = 0; i <= d; ++i) subset[i] = i;
      while (true) {
        auto [mx, mn] = lp_extrema_at(s, subset, eps, q);
        hi = std::max(hi, mx);
        lo = std::min(lo, mn);
        int i = d;
        while (i >= 0 && subset[i] == s.size() - (d + 1) + i) --i;
        if (i < 0) break;
        ++subset[i];
        for (int j = i + 1; j <= d; ++j) subset[j] = subset[j - 1] + 1;
      }
      CHECK(gmin[q] == doctest::Approx(lo).epsilon(1e-8));
      CHECK(gmax[q] == doctest::Approx(hi).epsilon(1e-8));
    }
  }
}

TEST_CASE("interpolating functions pass through the perturbed values") {
  DataSet s = random_instance(2, 5, 3);
  double eps = 0.1;
  ExtremeAffineSet set = enumerate_extreme_affine(s, eps, 1e-10, true);
  REQUIRE(set.source_subset.size() == set.functions.size());
  for (std::size_t fidx = 0; fidx < set.functions.size(); ++fidx) {
    const auto& subset = set.source_subset[fidx];
    std::uint32_t signs = set.source_signs[fidx];
    for (std::size_t k = 0; k < subset.size(); ++k) {
      double want = s.z[subset[k]] + ((signs >> k) & 1u ? eps : -eps);
      CHECK(eval_affine(set.functions[fidx], s.x[subset[k]]) ==
            doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("big-M factors use min(P^c - 1, P^{other})") {
  std::vector<double> gmin = {0.0, -1.0};
  std::vector<double> gmax = {2.0, 3.0};
  auto [m_minus, m_plus] = compute_bigM(gmin, gmax, 3, 2);
  // M^- factor = min(P^- - 1, P^+) = min(1, 3) = 1.
  CHECK(m_minus[0] == doctest::Approx(2.0));
  CHECK(m_minus[1] == doctest::Approx(4.0));
  // M^+ factor = min(P^+ - 1, P^-) = min(2, 2) = 2.
  CHECK(m_plus[0] == doctest::Approx(4.0));
  CHECK(m_plus[1] == doctest::Approx(8.0));
}

TEST_CASE("compute_bounds equals the enumeration route") {
  DataSet s = random_instance(2, 7, 21);
  double eps = 0.05;
  int pp = 3, pm = 2;
  BoundsBundle fast = compute_bounds(s, eps, pp, pm);

  ExtremeAffineSet set = enumerate_extreme_affine(s, eps);
  auto [gmin, gmax] = pointwise_extrema(set, s);
  CoefficientExtrema ce = coefficient_extrema(set);
  for (int i = 0; i < s.size(); ++i) {
    CHECK(fast.gmin[i] == doctest::Approx(gmin[i]).epsilon(1e-12));
    CHECK(fast.gmax[i] == doctest::Approx(gmax[i]).epsilon(1e-12));
  }
  for (int r = 0; r < s.dim; ++r) {
    CHECK(fast.a_lo[r] == doctest::Approx(ce.a_lo[r]).epsilon(1e-12));
    CHECK(fast.a_hi[r] == doctest::Approx(ce.a_hi[r]).epsilon(1e-12));
    // a' = min(P^- - 1, P^+) * (a_hi - a_lo).
    CHECK(fast.a_prime[r] ==
          doctest::Approx(std::min(pm - 1, pp) * (ce.a_hi[r] - ce.a_lo[r])));
  }
  CHECK(fast.b_lo == doctest::Approx(ce.b_lo).epsilon(1e-12));
  CHECK(fast.b_hi == doctest::Approx(ce.b_hi).epsilon(1e-12));
  CHECK(fast.b_prime ==
        doctest::Approx(std::min(pm - 1, pp) * (ce.b_hi - ce.b_lo)));
}

TEST_CASE("thread count does not change the bundle") {
  DataSet s = random_instance(2, 9, 77);
  BoundsBundle one = compute_bounds(s, 0.1, 2, 2, 1);
  BoundsBundle many = compute_bounds(s, 0.1, 2, 2, 4);
  CHECK(one.gmin == many.gmin);
  CHECK(one.gmax == many.gmax);
  CHECK(one.m_minus == many.m_minus);
  CHECK(one.a_lo == many.a_lo);
  CHECK(one.a_hi == many.a_hi);
  CHECK(one.b_lo == many.b_lo);
  CHECK(one.b_hi == many.b_hi);
}

TEST_CASE("bounds bundle JSON round trip") {
  DataSet s = random_instance(1, 5, 9);
  BoundsBundle b = compute_bounds(s, 0.05, 2, 3);
  BoundsBundle back = BoundsBundle::from_json(b.to_json());
  CHECK(back.dim == b.dim);
  CHECK(back.eps == b.eps);
  CHECK(back.pieces_plus == b.pieces_plus);
  CHECK(back.pieces_minus == b.pieces_minus);
  CHECK(back.gmin == b.gmin);
  CHECK(back.gmax == b.gmax);
  CHECK(back.m_minus == b.m_minus);
  CHECK(back.m_plus == b.m_plus);
  CHECK(back.a_prime == b.a_prime);
  CHECK(back.b_prime == b.b_prime);
}

TEST_CASE("collinear subsets abort enumeration with a diagnostic") {
  DataSet s;
  s.dim = 2;
  s.x = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {0.3, 0.9}};
  s.z = {0.0, 1.0, 2.0, 0.5};
  CHECK_THROWS_AS(enumerate_extreme_affine(s, 0.1), Error);
}

TEST_CASE("pairwise big-M is the sum of point values") {
  std::vector<double> m = {1.0, 2.5, 4.0};
  auto pw = pairwise_bigM(m);
  CHECK(pw[0][1] == doctest::Approx(3.5));
  CHECK(pw[2][1] == doctest::Approx(6.5));
}
