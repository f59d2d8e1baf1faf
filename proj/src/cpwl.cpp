// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpwlfit/cpwl.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "cpwlfit/error.hpp"

namespace cpwlfit {

double eval_affine(const AffinePiece& p, const std::vector<double>& x) {
  if (p.a.size() != x.size())
    throw validation_error("affine piece and point dimensions differ");
  double v = p.b;
  for (std::size_t r = 0; r < x.size(); ++r) v += p.a[r] * x[r];
  return v;
}

double ConvexPWL::eval(const std::vector<double>& x) const {
  if (pieces.empty()) throw validation_error("convex part has no pieces");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pieces) best = std::max(best, eval_affine(p, x));
  return best;
}

std::vector<int> ConvexPWL::argmax_set(const std::vector<double>& x,
                                       double tol) const {
  double best = eval(x);
  std::vector<int> idx;
  for (std::size_t j = 0; j < pieces.size(); ++j)
    if (best - eval_affine(pieces[j], x) <= tol) idx.push_back(static_cast<int>(j));
  return idx;
}

double DCFunction::eval(const std::vector<double>& x) const {
  return plus.eval(x) - minus.eval(x);
}

DCEvalResult eval_dc(const DCFunction& f, const std::vector<double>& x,
                     double tol) {
  DCEvalResult r;
  r.value = f.plus.eval(x) - f.minus.eval(x);
  r.plus_active = f.plus.argmax_set(x, tol);
  r.minus_active = f.minus.argmax_set(x, tol);
  return r;
}

std::string DCFunction::to_json() const {
  nlohmann::json j;
  auto dump_part = [](const ConvexPWL& part) {
    auto arr = nlohmann::json::array();
    for (const auto& p : part.pieces) {
      nlohmann::json piece;
      piece["a"] = p.a;
      piece["b"] = p.b;
      arr.push_back(piece);
    }
    return arr;
  };
  j["plus"] = dump_part(plus);
  j["minus"] = dump_part(minus);
  return j.dump(2);
}

DCFunction DCFunction::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  DCFunction f;
  auto load_part = [](const nlohmann::json& arr) {
    ConvexPWL part;
    for (const auto& piece : arr) {
      AffinePiece p;
      p.a = piece.at("a").get<std::vector<double>>();
      p.b = piece.at("b").get<double>();
      part.pieces.push_back(std::move(p));
    }
    if (part.pieces.empty())
      throw parse_error("convex part must have at least one piece");
    return part;
  };
  f.plus = load_part(j.at("plus"));
  f.minus = load_part(j.at("minus"));
  return f;
}

std::string FitReport::to_json() const {
  nlohmann::json j;
  j["errors"] = errors;
  j["max_abs_error"] = max_abs_error;
  j["mean_abs_error"] = mean_abs_error;
  j["eps"] = eps;
  j["feasible"] = feasible;
  j["worst_point"] = worst_point;
  return j.dump(2);
}

FitReport verify_eps_approx(const DCFunction& f, const DataSet& s, double eps,
                            double report_tol) {
  FitReport rep;
  rep.eps = eps;
  rep.errors.resize(s.size());
  double sum = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    double e = f.eval(s.x[i]) - s.z[i];
    rep.errors[i] = e;
    double ae = std::abs(e);
    sum += ae;
    if (ae > rep.max_abs_error) {
      rep.max_abs_error = ae;
      rep.worst_point = i;
    }
  }
  rep.mean_abs_error = s.size() ? sum / s.size() : 0.0;
  rep.feasible = rep.max_abs_error <= eps + report_tol;
  return rep;
}

ActivityMap activity_map(const DCFunction& f, const DataSet& s, double tol) {
  ActivityMap m;
  m.plus_active.resize(s.size());
  m.minus_active.resize(s.size());
  for (int i = 0; i < s.size(); ++i) {
    m.plus_active[i] = f.plus.argmax_set(s.x[i], tol);
    m.minus_active[i] = f.minus.argmax_set(s.x[i], tol);
  }
  return m;
}

namespace {

// Maps each piece index to the first index with identical (a,b) so
// duplicate pieces count as one logical piece.
std::vector<int> canonical_piece_indices(const ConvexPWL& part, double tol) {
  std::vector<int> canon(part.pieces.size());
  for (std::size_t j = 0; j < part.pieces.size(); ++j) {
    canon[j] = static_cast<int>(j);
    for (std::size_t k = 0; k < j; ++k) {
      const auto& pj = part.pieces[j];
      const auto& pk = part.pieces[k];
      bool same = std::abs(pj.b - pk.b) <= tol;
      for (std::size_t r = 0; same && r < pj.a.size(); ++r)
        same = std::abs(pj.a[r] - pk.a[r]) <= tol;
      if (same) {
        canon[j] = static_cast<int>(k);
        break;
      }
    }
  }
  return canon;
}

}  // namespace

WellBehavedReport check_well_behaved(const DCFunction& f, const DataSet& s,
                                     double tol) {
  WellBehavedReport rep;
  rep.required = s.dim + 1;
  ActivityMap act = activity_map(f, s, tol);
  auto canon_plus = canonical_piece_indices(f.plus, 1e-12);
  auto canon_minus = canonical_piece_indices(f.minus, 1e-12);

  std::map<std::pair<int, int>, int> counts;
  // Active pairs: j in J_i and k in K_i for some i.
  for (int i = 0; i < s.size(); ++i)
    for (int j : act.plus_active[i])
      for (int k : act.minus_active[i])
        counts[{canon_plus[j], canon_minus[k]}] = 0;

  std::vector<double> f_at(s.size());
  for (int i = 0; i < s.size(); ++i) f_at[i] = f.eval(s.x[i]);

  rep.pass = true;
  for (auto& [pair, count] : counts) {
    const auto& pj = f.plus.pieces[pair.first];
    const auto& pk = f.minus.pieces[pair.second];
    for (int i = 0; i < s.size(); ++i) {
      double pair_value = eval_affine(pj, s.x[i]) - eval_affine(pk, s.x[i]);
      // Target z_i + e_i equals f(x_i).
      if (std::abs(pair_value - f_at[i]) <= tol) ++count;
    }
    rep.pairs.push_back(pair);
    rep.interpolation_counts.push_back(count);
    if (count < rep.required) rep.pass = false;
  }
  return rep;
}

bool point_in_simplex(const std::vector<double>& x,
                      const std::vector<std::vector<double>>& verts,
                      double tol) {
  int d = static_cast<int>(x.size());
  if (static_cast<int>(verts.size()) != d + 1)
    throw validation_error("simplex needs d+1 vertices");
  Eigen::MatrixXd m(d + 1, d + 1);
  Eigen::VectorXd rhs(d + 1);
  for (int c = 0; c <= d; ++c) {
    for (int r = 0; r < d; ++r) m(r, c) = verts[c][r];
    m(d, c) = 1.0;
  }
  for (int r = 0; r < d; ++r) rhs(r) = x[r];
  rhs(d) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw validation_error("degenerate simplex");
  Eigen::VectorXd lambda = lu.solve(rhs);
  for (int c = 0; c <= d; ++c)
    if (lambda(c) < -tol) return false;
  return true;
}

bool segment_crosses_facet(const std::vector<double>& q1,
                           const std::vector<double>& q2,
                           const std::vector<std::vector<double>>& verts,
                           double tol) {
  int d = static_cast<int>(q1.size());
  if (static_cast<int>(verts.size()) != d)
    throw validation_error("facet needs d vertices in R^d");
  // q1 + t (q2 - q1) = sum_c lambda_c v_c, sum lambda = 1.
  // Unknowns: lambda_1..lambda_d, t.
  Eigen::MatrixXd m(d + 1, d + 1);
  Eigen::VectorXd rhs(d + 1);
  for (int c = 0; c < d; ++c) {
    for (int r = 0; r < d; ++r) m(r, c) = verts[c][r];
    m(d, c) = 1.0;
  }
  for (int r = 0; r < d; ++r) m(r, d) = q1[r] - q2[r];
  m(d, d) = 0.0;
  for (int r = 0; r < d; ++r) rhs(r) = q1[r];
  rhs(d) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) {
    // Either the facet is degenerate (error) or the segment is
    // parallel to the facet hyperplane; coplanar (measure-zero)
    // contact counts as non-crossing.
    Eigen::MatrixXd diff(d, d - 1);
    for (int c = 1; c < d; ++c)
      for (int r = 0; r < d; ++r) diff(r, c - 1) = verts[c][r] - verts[0][r];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(diff);
    if (qr.rank() < d - 1) throw validation_error("degenerate facet");
    return false;
  }
  Eigen::VectorXd sol = lu.solve(rhs);
  double t = sol(d);
  if (t <= tol || t >= 1.0 - tol) return false;
  for (int c = 0; c < d; ++c)
    if (sol(c) <= tol) return false;  // interior of the facet only
  return true;
}

}  // namespace cpwlfit
