// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpwlfit/preprocess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "cpwlfit/error.hpp"

namespace cpwlfit {

namespace {

constexpr double kSingularTol = 1e-12;

std::string subset_to_string(const std::vector<int>& subset) {
  std::string s = "{";
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(subset[k]);
  }
  return s + "}";
}

// Iterates (d+1)-subsets in lexicographic order, calling fn(subset).
// Returns early when fn returns false.
template <typename Fn>
void for_each_subset(int n, int k, Fn&& fn) {
  std::vector<int> subset(k);
  for (int i = 0; i < k; ++i) subset[i] = i;
  while (true) {
    fn(const_cast<const std::vector<int>&>(subset));
    int i = k - 1;
    while (i >= 0 && subset[i] == n - k + i) --i;
    if (i < 0) break;
    ++subset[i];
    for (int j = i + 1; j < k; ++j) subset[j] = subset[j - 1] + 1;
  }
}

// Factorizes M_s once and emits the 2^{d+1} vertex solutions.
template <typename Fn>
void emit_subset_functions(const DataSet& s, double eps,
                           const std::vector<int>& subset, Fn&& emit) {
  int d = s.dim;
  Eigen::MatrixXd m(d + 1, d + 1);
  Eigen::VectorXd base(d + 1);
  for (int k = 0; k <= d; ++k) {
    for (int r = 0; r < d; ++r) m(k, r) = s.x[subset[k]][r];
    m(k, d) = 1.0;
    base(k) = s.z[subset[k]];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  double det = std::abs(lu.determinant());
  if (norm == 0.0 || det <= kSingularTol * std::pow(norm, d))
    throw numerical_error("singular lifted matrix for subset " +
                          subset_to_string(subset) +
                          " (general-position violation)");

  std::uint32_t patterns = 1u << (d + 1);
  Eigen::VectorXd rhs(d + 1);
  AffinePiece piece;
  piece.a.resize(d);
  for (std::uint32_t signs = 0; signs < patterns; ++signs) {
    if (signs == 0 || eps != 0.0) {
      for (int k = 0; k <= d; ++k)
        rhs(k) = base(k) + ((signs >> k) & 1u ? eps : -eps);
      Eigen::VectorXd sol = lu.solve(rhs);
      for (int r = 0; r < d; ++r) piece.a[r] = sol(r);
      piece.b = sol(d);
    }
    // For eps == 0 every sign pattern coincides; the solve is reused.
    emit(piece, subset, signs);
  }
}

struct FoldState {
  std::vector<double> gmin, gmax;
  std::vector<double> a_lo, a_hi;
  double b_lo = std::numeric_limits<double>::infinity();
  double b_hi = -std::numeric_limits<double>::infinity();

  explicit FoldState(const DataSet& s) {
    gmin.assign(s.size(), std::numeric_limits<double>::infinity());
    gmax.assign(s.size(), -std::numeric_limits<double>::infinity());
    a_lo.assign(s.dim, std::numeric_limits<double>::infinity());
    a_hi.assign(s.dim, -std::numeric_limits<double>::infinity());
  }

  void absorb(const AffinePiece& g, const DataSet& s) {
    for (int i = 0; i < s.size(); ++i) {
      double v = g.b;
      for (int r = 0; r < s.dim; ++r) v += g.a[r] * s.x[i][r];
      gmin[i] = std::min(gmin[i], v);
      gmax[i] = std::max(gmax[i], v);
    }
    for (int r = 0; r < s.dim; ++r) {
      a_lo[r] = std::min(a_lo[r], g.a[r]);
      a_hi[r] = std::max(a_hi[r], g.a[r]);
    }
    b_lo = std::min(b_lo, g.b);
    b_hi = std::max(b_hi, g.b);
  }

  void merge(const FoldState& other) {
    for (std::size_t i = 0; i < gmin.size(); ++i) {
      gmin[i] = std::min(gmin[i], other.gmin[i]);
      gmax[i] = std::max(gmax[i], other.gmax[i]);
    }
    for (std::size_t r = 0; r < a_lo.size(); ++r) {
      a_lo[r] = std::min(a_lo[r], other.a_lo[r]);
      a_hi[r] = std::max(a_hi[r], other.a_hi[r]);
    }
    b_lo = std::min(b_lo, other.b_lo);
    b_hi = std::max(b_hi, other.b_hi);
  }
};

}  // namespace

void visit_extreme_affine(
    const DataSet& s, double eps,
    const std::function<void(const AffinePiece&)>& visit) {
  if (eps < 0.0) throw validation_error("eps must be nonnegative");
  if (s.size() < s.dim + 1) throw validation_error("need at least d+1 points");
  for_each_subset(s.size(), s.dim + 1, [&](const std::vector<int>& subset) {
    emit_subset_functions(s, eps, subset,
                          [&](const AffinePiece& p, const std::vector<int>&,
                              std::uint32_t) { visit(p); });
  });
}

ExtremeAffineSet enumerate_extreme_affine(const DataSet& s, double eps,
                                          double dedup_tol, bool keep_sources) {
  if (eps < 0.0) throw validation_error("eps must be nonnegative");
  if (s.size() < s.dim + 1) throw validation_error("need at least d+1 points");

  ExtremeAffineSet set;
  struct Entry {
    AffinePiece piece;
    std::vector<int> subset;
    std::uint32_t signs;
  };
  std::vector<Entry> entries;
  for_each_subset(s.size(), s.dim + 1, [&](const std::vector<int>& subset) {
    emit_subset_functions(
        s, eps, subset,
        [&](const AffinePiece& p, const std::vector<int>& sub,
            std::uint32_t signs) {
          ++set.raw_count;
          entries.push_back({p, sub, signs});
        });
  });

  // Dedup: lexicographic sort on (a, b), then merge neighbors within
  // the componentwise tolerance.
  std::vector<int> order(entries.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  auto lex_less = [&](int lhs, int rhs) {
    const auto& l = entries[lhs].piece;
    const auto& r = entries[rhs].piece;
    for (int c = 0; c < s.dim; ++c)
      if (l.a[c] != r.a[c]) return l.a[c] < r.a[c];
    return l.b < r.b;
  };
  std::stable_sort(order.begin(), order.end(), lex_less);

  auto near = [&](const AffinePiece& l, const AffinePiece& r) {
    if (std::abs(l.b - r.b) > dedup_tol) return false;
    for (int c = 0; c < s.dim; ++c)
      if (std::abs(l.a[c] - r.a[c]) > dedup_tol) return false;
    return true;
  };
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Entry& e = entries[order[i]];
    if (!set.functions.empty() && near(set.functions.back(), e.piece)) {
      ++set.dedup_removed;
      continue;
    }
    set.functions.push_back(e.piece);
    if (keep_sources) {
      set.source_subset.push_back(e.subset);
      set.source_signs.push_back(e.signs);
    }
  }
  return set;
}

std::pair<std::vector<double>, std::vector<double>> pointwise_extrema(
    const ExtremeAffineSet& set, const DataSet& s) {
  if (set.functions.empty()) throw validation_error("empty affine set");
  std::vector<double> gmin(s.size(), std::numeric_limits<double>::infinity());
  std::vector<double> gmax(s.size(), -std::numeric_limits<double>::infinity());
  for (const auto& g : set.functions) {
    for (int i = 0; i < s.size(); ++i) {
      double v = eval_affine(g, s.x[i]);
      gmin[i] = std::min(gmin[i], v);
      gmax[i] = std::max(gmax[i], v);
    }
  }
  return {std::move(gmin), std::move(gmax)};
}

std::pair<std::vector<double>, std::vector<double>> compute_bigM(
    const std::vector<double>& gmin, const std::vector<double>& gmax,
    int pieces_plus, int pieces_minus) {
  if (pieces_plus < 1 || pieces_minus < 1)
    throw validation_error("piece counts must be >= 1");
  double factor_minus = std::min(pieces_minus - 1, pieces_plus);
  double factor_plus = std::min(pieces_plus - 1, pieces_minus);
  std::vector<double> m_minus(gmin.size()), m_plus(gmin.size());
  for (std::size_t i = 0; i < gmin.size(); ++i) {
    double range = gmax[i] - gmin[i];
    m_minus[i] = factor_minus * range;
    m_plus[i] = factor_plus * range;
  }
  return {std::move(m_minus), std::move(m_plus)};
}

CoefficientExtrema coefficient_extrema(const ExtremeAffineSet& set) {
  if (set.functions.empty()) throw validation_error("empty affine set");
  int d = set.functions.front().dim();
  CoefficientExtrema ext;
  ext.a_lo.assign(d, std::numeric_limits<double>::infinity());
  ext.a_hi.assign(d, -std::numeric_limits<double>::infinity());
  ext.b_lo = std::numeric_limits<double>::infinity();
  ext.b_hi = -std::numeric_limits<double>::infinity();
  for (const auto& g : set.functions) {
    for (int r = 0; r < d; ++r) {
      ext.a_lo[r] = std::min(ext.a_lo[r], g.a[r]);
      ext.a_hi[r] = std::max(ext.a_hi[r], g.a[r]);
    }
    ext.b_lo = std::min(ext.b_lo, g.b);
    ext.b_hi = std::max(ext.b_hi, g.b);
  }
  return ext;
}

void derived_bounds(BoundsBundle* bundle) {
  int d = bundle->dim;
  double factor = std::min(bundle->pieces_minus - 1, bundle->pieces_plus);
  bundle->a_prime.assign(d, 0.0);
  for (int r = 0; r < d; ++r)
    bundle->a_prime[r] = factor * (bundle->a_hi[r] - bundle->a_lo[r]);
  bundle->b_prime = factor * (bundle->b_hi - bundle->b_lo);
  auto [m_minus, m_plus] = compute_bigM(bundle->gmin, bundle->gmax,
                                        bundle->pieces_plus,
                                        bundle->pieces_minus);
  bundle->m_minus = std::move(m_minus);
  bundle->m_plus = std::move(m_plus);
}

std::vector<std::vector<double>> pairwise_bigM(const std::vector<double>& m) {
  std::size_t n = m.size();
  std::vector<std::vector<double>> table(n, std::vector<double>(n, 0.0));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      if (p != q) table[p][q] = m[p] + m[q];
  return table;
}

BoundsBundle compute_bounds(const DataSet& s, double eps, int pieces_plus,
                            int pieces_minus, int threads) {
  if (eps < 0.0) throw validation_error("eps must be nonnegative");
  if (pieces_plus < 1 || pieces_minus < 1)
    throw validation_error("piece counts must be >= 1");
  if (s.size() < s.dim + 1) throw validation_error("need at least d+1 points");

  int n = s.size();
  int k = s.dim + 1;
  if (threads <= 0)
    threads = std::max(1u, std::thread::hardware_concurrency());

  // Partition subsets by their first index; each task owns a
  // contiguous range of first indices. Extrema are associative and
  // commutative reductions, so the merge order does not matter.
  std::vector<int> first_indices;
  for (int i = 0; i + k <= n; ++i) first_indices.push_back(i);
  int tasks = std::min<int>(threads, static_cast<int>(first_indices.size()));

  auto run_range = [&](int task) {
    FoldState state(s);
    for (std::size_t fi = task; fi < first_indices.size();
         fi += static_cast<std::size_t>(tasks)) {
      int first = first_indices[fi];
      // Enumerate subsets whose smallest element is `first`.
      std::vector<int> subset(k);
      subset[0] = first;
      for (int j = 1; j < k; ++j) subset[j] = first + j;
      while (true) {
        emit_subset_functions(s, eps, subset,
                              [&](const AffinePiece& p, const std::vector<int>&,
                                  std::uint32_t) { state.absorb(p, s); });
        int j = k - 1;
        while (j >= 1 && subset[j] == n - k + j) --j;
        if (j < 1) break;
        ++subset[j];
        for (int l = j + 1; l < k; ++l) subset[l] = subset[l - 1] + 1;
      }
    }
    return state;
  };

  FoldState total(s);
  if (tasks <= 1) {
    total = run_range(0);
  } else {
    std::vector<std::future<FoldState>> futures;
    for (int task = 0; task < tasks; ++task)
      futures.push_back(std::async(std::launch::async, run_range, task));
    for (auto& f : futures) total.merge(f.get());
  }

  BoundsBundle bundle;
  bundle.dim = s.dim;
  bundle.eps = eps;
  bundle.pieces_plus = pieces_plus;
  bundle.pieces_minus = pieces_minus;
  bundle.gmin = std::move(total.gmin);
  bundle.gmax = std::move(total.gmax);
  bundle.a_lo = std::move(total.a_lo);
  bundle.a_hi = std::move(total.a_hi);
  bundle.b_lo = total.b_lo;
  bundle.b_hi = total.b_hi;
  derived_bounds(&bundle);
  return bundle;
}

std::string BoundsBundle::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["eps"] = eps;
  j["pieces_plus"] = pieces_plus;
  j["pieces_minus"] = pieces_minus;
  j["gmin"] = gmin;
  j["gmax"] = gmax;
  j["M_minus"] = m_minus;
  j["M_plus"] = m_plus;
  j["a_lo"] = a_lo;
  j["a_hi"] = a_hi;
  j["b_lo"] = b_lo;
  j["b_hi"] = b_hi;
  j["a_prime"] = a_prime;
  j["b_prime"] = b_prime;
  return j.dump(2);
}

BoundsBundle BoundsBundle::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  BoundsBundle b;
  b.dim = j.at("dim").get<int>();
  b.eps = j.at("eps").get<double>();
  b.pieces_plus = j.at("pieces_plus").get<int>();
  b.pieces_minus = j.at("pieces_minus").get<int>();
  b.gmin = j.at("gmin").get<std::vector<double>>();
  b.gmax = j.at("gmax").get<std::vector<double>>();
  b.m_minus = j.at("M_minus").get<std::vector<double>>();
  b.m_plus = j.at("M_plus").get<std::vector<double>>();
  b.a_lo = j.at("a_lo").get<std::vector<double>>();
  b.a_hi = j.at("a_hi").get<std::vector<double>>();
  b.b_lo = j.at("b_lo").get<double>();
  b.b_hi = j.at("b_hi").get<double>();
  b.a_prime = j.at("a_prime").get<std::vector<double>>();
  b.b_prime = j.at("b_prime").get<double>();
  return b;
}

}  // namespace cpwlfit
