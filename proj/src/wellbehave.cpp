// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpwlfit/wellbehave.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cpwlfit/error.hpp"
#include "cpwlfit/lp.hpp"

namespace cpwlfit {

namespace {

AffinePiece pair_function(const DCFunction& f, int j, int k) {
  const AffinePiece& p = f.plus.pieces[j];
  const AffinePiece& m = f.minus.pieces[k];
  AffinePiece out;
  out.a.resize(p.a.size());
  for (std::size_t r = 0; r < p.a.size(); ++r) out.a[r] = p.a[r] - m.a[r];
  out.b = p.b - m.b;
  return out;
}

// One row of the adjustment polyhedron over (a, b) in R^{d+1}:
// sense LE means a.x + b <= rhs, GE means >=, EQ an interpolation
// equality. `gain` marks inequalities whose activation interpolates a
// new data point.
struct TiltRow {
  int point = -1;
  RowSense sense = RowSense::EQ;
  double rhs = 0.0;
  bool gain = false;
};

struct GrowthOutcome {
  AffinePiece piece;
  int active_count = 0;
  std::vector<int> new_points;
};

// Active-set growth: starting from a feasible (a0, b0), repeatedly
// solve an LP minimizing one inactive inequality's slack subject to
// the polyhedron and all previously fixed equalities. A zero-slack
// optimum fixes that row to equality. Gain rows are tried first, in
// point order. Stops at min(d+1, #rows) active rows or when no
// remaining row can be driven to zero slack.
GrowthOutcome grow_active_set(const DataSet& s, const AffinePiece& start,
                              std::vector<TiltRow> rows) {
  const int d = s.dim;
  const int nv = d + 1;
  const double kActiveTol = 1e-9;

  int n_eq = 0;
  for (const auto& r : rows)
    if (r.sense == RowSense::EQ) ++n_eq;
  int target = std::min<int>(nv, static_cast<int>(rows.size()));

  auto row_coef = [&](const TiltRow& r) {
    std::vector<double> c(nv);
    for (int q = 0; q < d; ++q) c[q] = s.x[r.point][q];
    c[d] = 1.0;
    return c;
  };
  auto row_value = [&](const TiltRow& r, const AffinePiece& p) {
    double v = p.b;
    for (int q = 0; q < d; ++q) v += p.a[q] * s.x[r.point][q];
    return v;
  };

  // Feasibility of the start point is a precondition; a violated row
  // means activity data and the polyhedron disagree.
  for (const auto& r : rows) {
    double v = row_value(r, start) - r.rhs;
    double viol = r.sense == RowSense::LE ? v
                  : r.sense == RowSense::GE ? -v
                                            : std::abs(v);
    if (viol > 1e-7)
      throw numerical_error(
          "tilt polyhedron excludes the current piece (residual " +
          std::to_string(viol) + " at point " + std::to_string(r.point + 1) +
          ")");
  }

  GrowthOutcome out;
  out.piece = start;
  out.active_count = n_eq;

  std::vector<int> order;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].sense != RowSense::EQ && rows[i].gain) order.push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].sense != RowSense::EQ && !rows[i].gain) order.push_back(static_cast<int>(i));

  std::set<int> dead;  // rows proven unactivatable (monotone under growth)
  bool progress = true;
  while (out.active_count < target && progress) {
    progress = false;
    for (int ri : order) {
      if (rows[ri].sense == RowSense::EQ || dead.count(ri)) continue;

      DenseLP lp;
      lp.num_vars = nv;
      lp.objective.assign(nv, 0.0);
      // Minimize the chosen row's slack, a nonnegative quantity on
      // the polyhedron.
      double sgn = rows[ri].sense == RowSense::LE ? -1.0 : 1.0;
      auto c = row_coef(rows[ri]);
      for (int q = 0; q < nv; ++q) lp.objective[q] = sgn * c[q];
      for (const auto& r : rows) {
        DenseRow dr;
        dr.coef = row_coef(r);
        dr.sense = r.sense;
        dr.rhs = r.rhs;
        lp.rows.push_back(std::move(dr));
      }
      LPResult res = solve_dense_lp(lp);
      if (res.status != LPStatus::Optimal)
        throw numerical_error("tilt slack LP did not solve to optimality");
      double slack = res.objective - sgn * rows[ri].rhs;
      if (slack > kActiveTol) {
        dead.insert(ri);  // equalities only shrink the set; final
        continue;
      }
      // Activated: fix to equality and adopt the LP vertex.
      rows[ri].sense = RowSense::EQ;
      ++out.active_count;
      for (int q = 0; q < d; ++q) out.piece.a[q] = res.x[q];
      out.piece.b = res.x[d];
      if (rows[ri].gain) out.new_points.push_back(rows[ri].point);
      progress = true;
      break;  // re-scan with gains first
    }
  }
  std::sort(out.new_points.begin(), out.new_points.end());
  return out;
}

}  // namespace

PieceAssignment derive_assignment(const DCFunction& f, const DataSet& s,
                                  double tol) {
  s.validate();
  ActivityMap act = activity_map(f, s, tol);
  const int n = s.size();

  PieceAssignment out;
  out.targets.resize(n);
  std::map<std::pair<int, int>, int> pair_index;
  for (int i = 0; i < n; ++i) {
    out.targets[i] = f.eval(s.x[i]);
    if (act.plus_active[i].empty() || act.minus_active[i].empty())
      throw numerical_error("point " + std::to_string(i + 1) +
                            " has empty activity; evaluation broke down");
    for (int j : act.plus_active[i]) {
      for (int k : act.minus_active[i]) {
        auto key = std::make_pair(j, k);
        auto it = pair_index.find(key);
        if (it == pair_index.end()) {
          PiecePair p;
          p.plus_index = j;
          p.minus_index = k;
          p.function = pair_function(f, j, k);
          it = pair_index.emplace(key, static_cast<int>(out.pairs.size())).first;
          out.pairs.push_back(std::move(p));
        }
        out.pairs[it->second].points.push_back(i);
      }
    }
  }
  for (auto& p : out.pairs) {
    std::sort(p.points.begin(), p.points.end());
    p.points.erase(std::unique(p.points.begin(), p.points.end()),
                   p.points.end());
  }
  // Neighbors share exactly one index: same minus piece -> the shared
  // boundary lies in f^+ (sign +1); same plus piece -> in f^- (-1).
  for (std::size_t a = 0; a < out.pairs.size(); ++a) {
    for (std::size_t b = a + 1; b < out.pairs.size(); ++b) {
      const auto& pa = out.pairs[a];
      const auto& pb = out.pairs[b];
      bool same_j = pa.plus_index == pb.plus_index;
      bool same_k = pa.minus_index == pb.minus_index;
      if (same_j == same_k) continue;  // equal pair or disjoint
      int sign = same_k ? +1 : -1;
      out.edges.push_back({static_cast<int>(a), static_cast<int>(b), sign});
      out.edges.push_back({static_cast<int>(b), static_cast<int>(a), sign});
    }
  }
  return out;
}

TiltResult tilt_piece(const PieceAssignment& assign, int pair_index,
                      const DataSet& s) {
  if (pair_index < 0 || pair_index >= static_cast<int>(assign.pairs.size()))
    throw validation_error("pair index out of range");
  const PiecePair& pair = assign.pairs[pair_index];

  std::vector<TiltRow> rows;
  std::set<int> own(pair.points.begin(), pair.points.end());
  for (int i : pair.points)
    rows.push_back({i, RowSense::EQ, assign.targets[i], false});

  // Signed inequalities at the neighbors' interpolated points: the
  // pair function must stay on the correct side of the fit there.
  std::set<std::pair<int, int>> seen;  // (point, sign)
  for (const auto& e : assign.edges) {
    if (e.from_pair != pair_index) continue;
    const PiecePair& nb = assign.pairs[e.to_pair];
    for (int i : nb.points) {
      if (own.count(i)) continue;
      if (!seen.insert({i, e.sign}).second) continue;
      rows.push_back({i, e.sign > 0 ? RowSense::LE : RowSense::GE,
                      assign.targets[i], true});
    }
  }

  GrowthOutcome g = grow_active_set(s, pair.function, std::move(rows));
  return {g.piece, g.active_count, g.new_points};
}

namespace {

// Tilt for the transform loop. `plus_route` updates f_j^+ (valid when
// j appears in no other active pair); otherwise f_k^-. Rows are laid
// over every data point so the fit value is preserved everywhere:
//   plus route:  h(x_i) <= f^+(x_i) - f_k^-(x_i)   (gain where k active)
//   minus route: h(x_i) >= f_j^+(x_i) - f^-(x_i)   (gain where j active)
// with equalities at the pair's own points.
GrowthOutcome route_tilt(const DCFunction& f, const DataSet& s,
                         const PiecePair& pair, bool plus_route, double tol) {
  std::vector<TiltRow> rows;
  std::set<int> own(pair.points.begin(), pair.points.end());
  for (int i = 0; i < s.size(); ++i) {
    double target = f.eval(s.x[i]);
    if (own.count(i)) {
      rows.push_back({i, RowSense::EQ, target, false});
      continue;
    }
    DCEvalResult ev = eval_dc(f, s.x[i], tol);
    if (plus_route) {
      double fk = eval_affine(f.minus.pieces[pair.minus_index], s.x[i]);
      double plus_val = f.plus.eval(s.x[i]);
      bool k_active =
          std::find(ev.minus_active.begin(), ev.minus_active.end(),
                    pair.minus_index) != ev.minus_active.end();
      rows.push_back({i, RowSense::LE, plus_val - fk, k_active});
    } else {
      double fj = eval_affine(f.plus.pieces[pair.plus_index], s.x[i]);
      double minus_val = f.minus.eval(s.x[i]);
      bool j_active =
          std::find(ev.plus_active.begin(), ev.plus_active.end(),
                    pair.plus_index) != ev.plus_active.end();
      rows.push_back({i, RowSense::GE, fj - minus_val, j_active});
    }
  }
  return grow_active_set(s, pair.function, std::move(rows));
}

void write_back(DCFunction& f, const PiecePair& pair, const AffinePiece& h,
                bool plus_route) {
  const int d = h.dim();
  if (plus_route) {
    const AffinePiece& m = f.minus.pieces[pair.minus_index];
    AffinePiece& p = f.plus.pieces[pair.plus_index];
    for (int r = 0; r < d; ++r) p.a[r] = h.a[r] + m.a[r];
    p.b = h.b + m.b;
  } else {
    const AffinePiece& p = f.plus.pieces[pair.plus_index];
    AffinePiece& m = f.minus.pieces[pair.minus_index];
    for (int r = 0; r < d; ++r) m.a[r] = p.a[r] - h.a[r];
    m.b = p.b - h.b;
  }
}

}  // namespace

TransformReport transform(const DCFunction& f, const DataSet& s, double eps,
                          double tol) {
  FitReport fit = verify_eps_approx(f, s, eps);
  if (!fit.feasible)
    throw validation_error(
        "input is not an eps-approximation of the data set (max error " +
        std::to_string(fit.max_abs_error) + " > " + std::to_string(eps) + ")");

  TransformReport report;
  report.function = f;
  DCFunction& g = report.function;
  const int need = s.dim + 1;

  std::size_t max_iter =
      static_cast<std::size_t>(s.size()) *
          (g.plus.pieces.size() * g.minus.pieces.size()) + 1;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    PieceAssignment assign = derive_assignment(g, s, tol);

    std::vector<int> under;
    for (std::size_t p = 0; p < assign.pairs.size(); ++p)
      if (static_cast<int>(assign.pairs[p].points.size()) < need)
        under.push_back(static_cast<int>(p));
    if (under.empty()) break;
    std::stable_sort(under.begin(), under.end(), [&](int a, int b) {
      return assign.pairs[a].points.size() < assign.pairs[b].points.size();
    });

    std::vector<int> plus_use(g.plus.pieces.size(), 0);
    std::vector<int> minus_use(g.minus.pieces.size(), 0);
    for (const auto& p : assign.pairs) {
      ++plus_use[p.plus_index];
      ++minus_use[p.minus_index];
    }

    bool progressed = false;
    for (int pi : under) {
      const PiecePair& pair = assign.pairs[pi];
      std::vector<bool> routes;
      if (plus_use[pair.plus_index] == 1) routes.push_back(true);
      if (minus_use[pair.minus_index] == 1) routes.push_back(false);
      for (bool plus_route : routes) {
        GrowthOutcome got = route_tilt(g, s, pair, plus_route, tol);
        if (got.new_points.empty()) continue;
        write_back(g, pair, got.piece, plus_route);
        ++report.tilt_count;
        progressed = true;
        break;
      }
      if (progressed) break;
    }
    if (!progressed) {
      for (int pi : under)
        report.coupled_pairs.push_back({assign.pairs[pi].plus_index,
                                        assign.pairs[pi].minus_index});
      break;
    }
  }

  // The tilts preserve the fit at every data point by construction;
  // verify before returning.
  double worst = 0.0;
  for (int i = 0; i < s.size(); ++i)
    worst = std::max(worst, std::abs(g.eval(s.x[i]) - f.eval(s.x[i])));
  if (worst > 1e-8)
    throw numerical_error("transform drifted " + std::to_string(worst) +
                          " at a data point");

  report.well_behaved = check_well_behaved(g, s, tol).pass;
  return report;
}

}  // namespace cpwlfit
