// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpwlfit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cpwlfit/error.hpp"

namespace cpwlfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string idx(int i) { return std::to_string(i + 1); }  // 1-based names

}  // namespace

TighteningConfig preset(const std::string& id) {
  TighteningConfig c;
  if (id == "C1") {
    c.bigm_mode = BigMMode::Indicator;
  } else if (id == "C2") {
    c.bigm_mode = BigMMode::Default;
  } else if (id == "C3") {
    c.bigm_mode = BigMMode::Tight;
  } else if (id == "C4") {
    c.fix_first_piece = true;
    c.bigm_mode = BigMMode::Tight;
  } else if (id == "C5") {
    c.fix_first_piece = true;
    c.sort_pieces = true;
    c.bigm_mode = BigMMode::Tight;
  } else if (id == "C6") {
    c.fix_first_piece = true;
    c.sort_pieces = true;
    c.bigm_mode = BigMMode::Tight;
    c.bound_variables = true;
  } else if (id == "C7") {
    c.fix_first_piece = true;
    c.sort_pieces = true;
    c.points_per_piece = PointsPerPiece::PerConvexPart;
    c.bigm_mode = BigMMode::Tight;
    c.bound_variables = true;
  } else if (id == "C8") {
    c.fix_first_piece = true;
    c.sort_pieces = true;
    c.points_per_piece = PointsPerPiece::PerF;
    c.bigm_mode = BigMMode::Tight;
    c.bound_variables = true;
  } else if (id == "C9") {
    c.points_per_piece = PointsPerPiece::PerConvexPart;
    c.bigm_mode = BigMMode::Tight;
    c.bound_variables = true;
  } else if (id == "C10") {
    c.points_per_piece = PointsPerPiece::PerF;
    c.bigm_mode = BigMMode::Tight;
    c.bound_variables = true;
  } else if (id == "C11") {
    c.fix_first_piece = true;
    c.points_per_piece = PointsPerPiece::PerConvexPart;
    c.bigm_mode = BigMMode::Tight;
    c.bound_variables = true;
  } else {
    throw validation_error("unknown preset '" + id + "' (expected C1..C11)");
  }
  return c;
}

double round_up_one_significant(double v) {
  if (v <= 0.0) return 0.0;
  double p = std::pow(10.0, std::floor(std::log10(v)));
  double mantissa = v / p;
  double rounded = std::ceil(mantissa - 1e-9);
  return rounded * p;
}

double default_bigM(const std::vector<double>& m_minus,
                    const std::vector<double>& m_plus) {
  double mx = 0.0;
  for (double v : m_minus) mx = std::max(mx, v);
  for (double v : m_plus) mx = std::max(mx, v);
  return round_up_one_significant(mx);
}

int ModelIR::var_index(const std::string& symbol) const {
  auto it = catalog.find(symbol);
  if (it == catalog.end())
    throw validation_error("unknown catalog symbol '" + symbol + "'");
  return it->second;
}

std::string ModelIR::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  auto vars = nlohmann::json::array();
  for (const auto& v : variables) {
    nlohmann::json jv;
    jv["name"] = v.name;
    jv["lb"] = std::isfinite(v.lb) ? nlohmann::json(v.lb) : nlohmann::json();
    jv["ub"] = std::isfinite(v.ub) ? nlohmann::json(v.ub) : nlohmann::json();
    jv["binary"] = v.type == VarType::Binary;
    vars.push_back(jv);
  }
  j["variables"] = vars;
  auto dump_con = [](const Constraint& c) {
    nlohmann::json jc;
    jc["name"] = c.name;
    auto terms = nlohmann::json::array();
    for (const auto& t : c.terms) terms.push_back({t.var, t.coef});
    jc["terms"] = terms;
    jc["sense"] = c.sense == ConSense::LE ? "<=" : (c.sense == ConSense::GE ? ">=" : "=");
    jc["rhs"] = c.rhs;
    return jc;
  };
  auto cons = nlohmann::json::array();
  for (const auto& c : constraints) cons.push_back(dump_con(c));
  j["constraints"] = cons;
  auto inds = nlohmann::json::array();
  for (const auto& ic : indicators) {
    nlohmann::json ji;
    ji["bin_var"] = ic.bin_var;
    ji["active_value"] = ic.active_value;
    ji["row"] = dump_con(ic.row);
    inds.push_back(ji);
  }
  j["indicators"] = inds;
  auto obj = nlohmann::json::array();
  for (const auto& t : objective) obj.push_back({t.var, t.coef});
  j["objective"] = obj;
  j["objective_offset"] = objective_offset;
  return j.dump(2);
}

namespace {

class ModelBuilder {
 public:
  ModelBuilder(const DataSet& s, const FitParams& params, const Objective& obj,
               const TighteningConfig& cfg, const BoundsBundle* bounds)
      : s_(s), params_(params), obj_(obj), cfg_(cfg), bounds_(bounds),
        n_(s.size()), d_(s.dim), pp_(params.pieces_plus),
        pm_(params.pieces_minus) {}

  BuildResult run() {
    validate();
    add_core_variables();
    add_points_per_f_variables();
    add_objective_variables();
    add_core_constraints();
    add_fix_first_piece();
    add_sort_pieces();
    add_points_per_piece();
    add_variable_bounds();
    add_monotonicity_cuts();
    add_simplex_cuts();
    add_objective();
    // Base size = final size minus the strategy deltas, so that
    // base + per-strategy deltas always reproduces the built model.
    audit_.base_rows = model_.constraints.size() - audit_.sort_rows -
                       audit_.per_convex_rows - audit_.perf_rows -
                       audit_.monotonicity_rows - audit_.simplex_point_rows -
                       audit_.simplex_facet_rows;
    audit_.base_cols = model_.variables.size() - audit_.perf_cols;
    model_.name = "cpwlfit_" + s_.name;
    return {std::move(model_), audit_};
  }

 private:
  void validate() {
    if (params_.eps < 0.0) throw validation_error("eps must be nonnegative");
    if (pp_ < 1 || pm_ < 1)
      throw validation_error("piece counts must be >= 1");
    if (n_ < d_ + 1)
      throw validation_error("need at least d+1 points for fitting");
    bool needs_bounds =
        cfg_.bigm_mode == BigMMode::Tight || cfg_.bound_variables ||
        cfg_.monotonicity_cuts ||
        (cfg_.bigm_mode == BigMMode::Default && !cfg_.default_bigm_override);
    if (needs_bounds && !bounds_)
      throw build_error(
          "this tightening configuration requires a BoundsBundle");
    if (bounds_) {
      if (bounds_->dim != d_ || static_cast<int>(bounds_->gmin.size()) != n_)
        throw build_error("BoundsBundle does not match the data set");
      if (bounds_->pieces_plus != pp_ || bounds_->pieces_minus != pm_)
        throw build_error("BoundsBundle was computed for other piece counts");
      if (bounds_->eps != params_.eps)
        throw build_error("BoundsBundle was computed for a different eps");
    }
    if (obj_.kind == ObjectiveKind::Hierarchical && params_.eps <= 0.0)
      throw build_error("hierarchical objective requires eps > 0");
    if (cfg_.points_per_piece == PointsPerPiece::PerF) {
      std::size_t beta_count = static_cast<std::size_t>(n_) * pp_ * pm_;
      if (beta_count > cfg_.perf_variable_cap)
        throw build_error(
            "PerF would create " + std::to_string(beta_count) +
            " beta variables (cap " + std::to_string(cfg_.perf_variable_cap) +
            "); use PerConvexPart instead");
    }
  }

  int add_var(const std::string& name, double lb, double ub, VarType type) {
    int index = static_cast<int>(model_.variables.size());
    model_.variables.push_back({name, lb, ub, type});
    model_.catalog[name] = index;
    return index;
  }

  void add_row(const std::string& name, std::vector<LinTerm> terms,
               ConSense sense, double rhs) {
    model_.constraints.push_back({name, std::move(terms), sense, rhs});
  }

  bool needs_gamma() const {
    return cfg_.points_per_piece == PointsPerPiece::PerF ||
           objective_uses_gamma(obj_.kind) ||
           (obj_.kind == ObjectiveKind::Hierarchical &&
            objective_uses_gamma(obj_.primary));
  }

  static bool objective_uses_gamma(ObjectiveKind k) {
    return k == ObjectiveKind::PieceCountF ||
           k == ObjectiveKind::PieceCountFplus ||
           k == ObjectiveKind::PieceCountFminus;
  }

  void add_core_variables() {
    for (int i = 0; i < n_; ++i) add_var("f_" + idx(i), -kInf, kInf, VarType::Continuous);
    for (int i = 0; i < n_; ++i) add_var("fp_" + idx(i), -kInf, kInf, VarType::Continuous);
    for (int i = 0; i < n_; ++i) add_var("fm_" + idx(i), -kInf, kInf, VarType::Continuous);
    for (int i = 0; i < n_; ++i) add_var("e_" + idx(i), 0.0, params_.eps, VarType::Continuous);
    for (int j = 0; j < pp_; ++j)
      for (int r = 0; r < d_; ++r)
        add_var("ap_" + idx(j) + "_" + idx(r), -kInf, kInf, VarType::Continuous);
    for (int j = 0; j < pp_; ++j) add_var("bp_" + idx(j), -kInf, kInf, VarType::Continuous);
    for (int k = 0; k < pm_; ++k)
      for (int r = 0; r < d_; ++r)
        add_var("am_" + idx(k) + "_" + idx(r), -kInf, kInf, VarType::Continuous);
    for (int k = 0; k < pm_; ++k) add_var("bm_" + idx(k), -kInf, kInf, VarType::Continuous);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < pp_; ++j)
        add_var("del_p_" + idx(i) + "_" + idx(j), 0.0, 1.0, VarType::Binary);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < pm_; ++k)
        add_var("del_m_" + idx(i) + "_" + idx(k), 0.0, 1.0, VarType::Binary);
    audit_.base_binaries = static_cast<std::size_t>(n_) * (pp_ + pm_);
  }

  void add_points_per_f_variables() {
    if (cfg_.points_per_piece != PointsPerPiece::PerF && !needs_gamma()) return;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < pp_; ++j)
        for (int k = 0; k < pm_; ++k)
          add_var("beta_" + idx(i) + "_" + idx(j) + "_" + idx(k), 0.0, 1.0,
                  VarType::Continuous);
    for (int j = 0; j < pp_; ++j)
      for (int k = 0; k < pm_; ++k)
        add_var("gam_" + idx(j) + "_" + idx(k), 0.0, 1.0, VarType::Continuous);
    if (cfg_.points_per_piece == PointsPerPiece::PerF) {
      audit_.perf_cols = static_cast<std::size_t>(pp_) * pm_ * (n_ + 1);
    }
  }

  void add_objective_variables() {
    bool uses_alpha_plus = false, uses_alpha_minus = false;
    auto scan = [&](ObjectiveKind k) {
      if (k == ObjectiveKind::PieceCountFplus) uses_alpha_plus = true;
      if (k == ObjectiveKind::PieceCountFminus) uses_alpha_minus = true;
    };
    scan(obj_.kind);
    if (obj_.kind == ObjectiveKind::Hierarchical) scan(obj_.primary);
    if (uses_alpha_plus)
      for (int j = 0; j < pp_; ++j)
        add_var("alp_" + idx(j), 0.0, 1.0, VarType::Continuous);
    if (uses_alpha_minus)
      for (int k = 0; k < pm_; ++k)
        add_var("alm_" + idx(k), 0.0, 1.0, VarType::Continuous);
    add_var("Q", -kInf, kInf, VarType::Continuous);
    if (obj_.kind == ObjectiveKind::Hierarchical) {
      add_var("Q1", -kInf, kInf, VarType::Continuous);
      add_var("Q2", -kInf, kInf, VarType::Continuous);
    }
  }

  double big_m_value(int i, bool plus_part) const {
    if (cfg_.bigm_mode == BigMMode::Default) {
      if (cfg_.default_bigm_override) return *cfg_.default_bigm_override;
      return default_bigM(bounds_->m_minus, bounds_->m_plus);
    }
    return plus_part ? bounds_->m_plus[i] : bounds_->m_minus[i];
  }

  // One convex part: the max-of-affine rows for every point/piece.
  void add_convex_rows(bool plus_part) {
    const char* tag = plus_part ? "p" : "m";
    int pieces = plus_part ? pp_ : pm_;
    for (int i = 0; i < n_; ++i) {
      int fc = model_.var_index((plus_part ? "fp_" : "fm_") + idx(i));
      for (int j = 0; j < pieces; ++j) {
        std::vector<LinTerm> terms;
        terms.push_back({fc, 1.0});
        for (int r = 0; r < d_; ++r) {
          int a = model_.var_index(std::string(plus_part ? "ap_" : "am_") +
                                   idx(j) + "_" + idx(r));
          terms.push_back({a, -s_.x[i][r]});
        }
        int b = model_.var_index(std::string(plus_part ? "bp_" : "bm_") + idx(j));
        terms.push_back({b, -1.0});
        add_row("cvx0_" + std::string(tag) + "_" + idx(i) + "_" + idx(j),
                terms, ConSense::GE, 0.0);

        int del = model_.var_index("del_" + std::string(tag) + "_" + idx(i) +
                                   "_" + idx(j));
        if (cfg_.bigm_mode == BigMMode::Indicator) {
          Constraint row;
          row.name = "cvxi_" + std::string(tag) + "_" + idx(i) + "_" + idx(j);
          row.terms = terms;
          row.sense = ConSense::LE;
          row.rhs = 0.0;
          model_.indicators.push_back({del, 1, std::move(row)});
        } else {
          double m = big_m_value(i, plus_part);
          auto terms_m = terms;
          terms_m.push_back({del, m});
          add_row("cvxm_" + std::string(tag) + "_" + idx(i) + "_" + idx(j),
                  std::move(terms_m), ConSense::LE, m);
        }
      }
      std::vector<LinTerm> cover;
      for (int j = 0; j < pieces; ++j)
        cover.push_back({model_.var_index("del_" + std::string(tag) + "_" +
                                          idx(i) + "_" + idx(j)),
                         1.0});
      add_row("cover_" + std::string(tag) + "_" + idx(i), std::move(cover),
              ConSense::GE, 1.0);
    }
  }

  void add_core_constraints() {
    for (int i = 0; i < n_; ++i) {
      add_row("dc_" + idx(i),
              {{model_.var_index("f_" + idx(i)), 1.0},
               {model_.var_index("fp_" + idx(i)), -1.0},
               {model_.var_index("fm_" + idx(i)), 1.0}},
              ConSense::EQ, 0.0);
    }
    add_convex_rows(true);
    add_convex_rows(false);
    for (int i = 0; i < n_; ++i) {
      int f = model_.var_index("f_" + idx(i));
      int e = model_.var_index("e_" + idx(i));
      add_row("fit_lo_" + idx(i), {{f, 1.0}, {e, -1.0}}, ConSense::LE, s_.z[i]);
      add_row("fit_hi_" + idx(i), {{f, 1.0}, {e, 1.0}}, ConSense::GE, s_.z[i]);
    }
  }

  void tighten_bound(int var, double lb, double ub) {
    auto& v = model_.variables[var];
    v.lb = std::max(v.lb, lb);
    v.ub = std::min(v.ub, ub);
  }

  void add_fix_first_piece() {
    if (!cfg_.fix_first_piece) return;
    for (int r = 0; r < d_; ++r)
      tighten_bound(model_.var_index("am_1_" + idx(r)), 0.0, 0.0);
    tighten_bound(model_.var_index("bm_1"), 0.0, 0.0);
    audit_.fix_bound_count = static_cast<std::size_t>(d_) + 1;
  }

  void add_sort_pieces() {
    if (!cfg_.sort_pieces) return;
    std::size_t before = model_.constraints.size();
    for (int j = 0; j + 1 < pp_; ++j)
      add_row("ord_p_" + idx(j),
              {{model_.var_index("ap_" + idx(j) + "_1"), 1.0},
               {model_.var_index("ap_" + idx(j + 1) + "_1"), -1.0}},
              ConSense::LE, 0.0);
    for (int k = 0; k + 1 < pm_; ++k)
      add_row("ord_m_" + idx(k),
              {{model_.var_index("am_" + idx(k) + "_1"), 1.0},
               {model_.var_index("am_" + idx(k + 1) + "_1"), -1.0}},
              ConSense::LE, 0.0);
    audit_.sort_rows = model_.constraints.size() - before;
  }

  void add_points_per_piece() {
    if (cfg_.points_per_piece == PointsPerPiece::PerConvexPart) {
      std::size_t before = model_.constraints.size();
      for (int j = 0; j < pp_; ++j) {
        std::vector<LinTerm> terms;
        for (int i = 0; i < n_; ++i)
          terms.push_back({model_.var_index("del_p_" + idx(i) + "_" + idx(j)), 1.0});
        add_row("npts_p_" + idx(j), std::move(terms), ConSense::GE, d_ + 1.0);
      }
      for (int k = 0; k < pm_; ++k) {
        std::vector<LinTerm> terms;
        for (int i = 0; i < n_; ++i)
          terms.push_back({model_.var_index("del_m_" + idx(i) + "_" + idx(k)), 1.0});
        add_row("npts_m_" + idx(k), std::move(terms), ConSense::GE, d_ + 1.0);
      }
      audit_.per_convex_rows = model_.constraints.size() - before;
    }
    bool emit_beta_rows =
        cfg_.points_per_piece == PointsPerPiece::PerF || needs_gamma();
    if (!emit_beta_rows) return;
    std::size_t before = model_.constraints.size();
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < pp_; ++j) {
        for (int k = 0; k < pm_; ++k) {
          std::string suffix = idx(i) + "_" + idx(j) + "_" + idx(k);
          int beta = model_.var_index("beta_" + suffix);
          int dp = model_.var_index("del_p_" + idx(i) + "_" + idx(j));
          int dm = model_.var_index("del_m_" + idx(i) + "_" + idx(k));
          int gam = model_.var_index("gam_" + idx(j) + "_" + idx(k));
          add_row("bdp_" + suffix, {{beta, 1.0}, {dp, -1.0}}, ConSense::LE, 0.0);
          add_row("bdm_" + suffix, {{beta, 1.0}, {dm, -1.0}}, ConSense::LE, 0.0);
          add_row("bdpm_" + suffix, {{beta, 1.0}, {dp, -1.0}, {dm, -1.0}},
                  ConSense::GE, -1.0);
          add_row("bg_" + suffix, {{beta, 1.0}, {gam, -1.0}}, ConSense::LE, 0.0);
        }
      }
    }
    if (cfg_.points_per_piece == PointsPerPiece::PerF) {
      for (int j = 0; j < pp_; ++j) {
        for (int k = 0; k < pm_; ++k) {
          std::vector<LinTerm> terms;
          for (int i = 0; i < n_; ++i)
            terms.push_back(
                {model_.var_index("beta_" + idx(i) + "_" + idx(j) + "_" + idx(k)),
                 1.0});
          terms.push_back({model_.var_index("gam_" + idx(j) + "_" + idx(k)),
                           -(d_ + 1.0)});
          add_row("sbg_" + idx(j) + "_" + idx(k), std::move(terms), ConSense::GE,
                  0.0);
        }
      }
      audit_.perf_rows = model_.constraints.size() - before;
    }
  }

  void add_variable_bounds() {
    if (!cfg_.bound_variables) return;
    std::size_t count = 0;
    for (int i = 0; i < n_; ++i) {
      tighten_bound(model_.var_index("f_" + idx(i)), s_.z[i] - params_.eps,
                    s_.z[i] + params_.eps);
      tighten_bound(model_.var_index("fm_" + idx(i)), 0.0, bounds_->m_minus[i]);
      tighten_bound(model_.var_index("fp_" + idx(i)), s_.z[i] - params_.eps,
                    s_.z[i] + params_.eps + bounds_->m_minus[i]);
      count += 3;
    }
    // Coefficient bounds. The zero-centered minus-side forms and the
    // one-sided first-coefficient forms assume the fixed first piece
    // and the sorted ordering; without those flags the symmetric
    // always-valid forms are used instead (they prune only redundant
    // DC representations, never CPWL solutions).
    bool sorted_forms = cfg_.sort_pieces && cfg_.fix_first_piece;
    for (int k = 0; k < pm_; ++k) {
      for (int r = 0; r < d_; ++r) {
        double hi = bounds_->a_prime[r];
        double lo = (r == 0 && sorted_forms) ? 0.0 : -hi;
        tighten_bound(model_.var_index("am_" + idx(k) + "_" + idx(r)), lo, hi);
        ++count;
      }
      tighten_bound(model_.var_index("bm_" + idx(k)), -bounds_->b_prime,
                    bounds_->b_prime);
      ++count;
    }
    for (int j = 0; j < pp_; ++j) {
      for (int r = 0; r < d_; ++r) {
        double lo = bounds_->a_lo[r] - bounds_->a_prime[r];
        double hi = bounds_->a_hi[r] + bounds_->a_prime[r];
        if (r == 0 && sorted_forms) lo = bounds_->a_lo[r];
        tighten_bound(model_.var_index("ap_" + idx(j) + "_" + idx(r)), lo, hi);
        ++count;
      }
      tighten_bound(model_.var_index("bp_" + idx(j)),
                    bounds_->b_lo - bounds_->b_prime,
                    bounds_->b_hi + bounds_->b_prime);
      ++count;
    }
    audit_.variable_bound_count = count;
  }

  void add_monotonicity_cuts() {
    if (!cfg_.monotonicity_cuts) return;
    std::size_t before = model_.constraints.size();
    auto pair_m = [&](bool plus_part, int p, int q) {
      const auto& m = plus_part ? bounds_->m_plus : bounds_->m_minus;
      return m[p] + m[q];
    };
    for (int c = 0; c < 2; ++c) {
      bool plus_part = (c == 0);
      int pieces = plus_part ? pp_ : pm_;
      const char* tag = plus_part ? "p" : "m";
      for (int j = 0; j < pieces; ++j) {
        for (int k = j + 1; k < pieces; ++k) {
          for (int p = 0; p < n_; ++p) {
            for (int q = 0; q < n_; ++q) {
              if (p == q) continue;
              if (cuts_emitted_ >= cfg_.cut_budget) {
                audit_.monotonicity_rows = model_.constraints.size() - before;
                return;
              }
              double m = pair_m(plus_part, p, q);
              std::vector<LinTerm> terms;
              for (int r = 0; r < d_; ++r) {
                double dx = s_.x[p][r] - s_.x[q][r];
                if (dx == 0.0) continue;
                terms.push_back(
                    {model_.var_index(std::string(plus_part ? "ap_" : "am_") +
                                      idx(j) + "_" + idx(r)),
                     dx});
                terms.push_back(
                    {model_.var_index(std::string(plus_part ? "ap_" : "am_") +
                                      idx(k) + "_" + idx(r)),
                     -dx});
              }
              terms.push_back({model_.var_index("del_" + std::string(tag) +
                                                "_" + idx(p) + "_" + idx(j)),
                               -m});
              terms.push_back({model_.var_index("del_" + std::string(tag) +
                                                "_" + idx(q) + "_" + idx(k)),
                               -m});
              add_row("mono_" + std::string(tag) + "_" + idx(j) + "_" + idx(k) +
                          "_" + idx(p) + "_" + idx(q),
                      std::move(terms), ConSense::GE, -2.0 * m);
              ++cuts_emitted_;
            }
          }
        }
      }
    }
    audit_.monotonicity_rows = model_.constraints.size() - before;
  }

  void add_simplex_cuts() {
    if (cfg_.simplex_cuts == SimplexCuts::None) return;
    add_point_in_simplex_cuts();
    if (cfg_.simplex_cuts == SimplexCuts::Both) add_facet_crossing_cuts();
  }

  void add_point_in_simplex_cuts() {
    std::size_t before = model_.constraints.size();
    std::vector<int> subset(d_ + 1);
    for (int i = 0; i <= d_; ++i) subset[i] = i;
    std::vector<std::vector<double>> verts(d_ + 1);
    while (true) {
      for (int i = 0; i <= d_; ++i) verts[i] = s_.x[subset[i]];
      for (int q = 0; q < n_; ++q) {
        if (std::find(subset.begin(), subset.end(), q) != subset.end())
          continue;
        bool inside = false;
        try {
          inside = point_in_simplex(s_.x[q], verts);
        } catch (const Error&) {
          continue;  // degenerate simplex: no cut
        }
        if (!inside) continue;
        for (int c = 0; c < 2; ++c) {
          bool plus_part = (c == 0);
          int pieces = plus_part ? pp_ : pm_;
          const char* tag = plus_part ? "p" : "m";
          for (int j = 0; j < pieces; ++j) {
            if (cuts_emitted_ >= cfg_.cut_budget) {
              audit_.simplex_point_rows = model_.constraints.size() - before;
              return;
            }
            std::vector<LinTerm> terms;
            for (int p : subset)
              terms.push_back({model_.var_index("del_" + std::string(tag) +
                                                "_" + idx(p) + "_" + idx(j)),
                               1.0});
            terms.push_back({model_.var_index("del_" + std::string(tag) + "_" +
                                              idx(q) + "_" + idx(j)),
                             -1.0});
            std::string name = "simp_" + std::string(tag) + "_" + idx(j);
            for (int p : subset) name += "_" + idx(p);
            name += "_q" + idx(q);
            add_row(name, std::move(terms), ConSense::LE, static_cast<double>(d_));
            ++cuts_emitted_;
          }
        }
      }
      int i = d_;
      while (i >= 0 && subset[i] == n_ - (d_ + 1) + i) --i;
      if (i < 0) break;
      ++subset[i];
      for (int j = i + 1; j <= d_; ++j) subset[j] = subset[j - 1] + 1;
    }
    audit_.simplex_point_rows = model_.constraints.size() - before;
  }

  void add_facet_crossing_cuts() {
    std::size_t before = model_.constraints.size();
    std::vector<int> facet(d_);
    for (int i = 0; i < d_; ++i) facet[i] = i;
    std::vector<std::vector<double>> verts(d_);
    while (true) {
      for (int i = 0; i < d_; ++i) verts[i] = s_.x[facet[i]];
      for (int q1 = 0; q1 < n_; ++q1) {
        if (std::find(facet.begin(), facet.end(), q1) != facet.end()) continue;
        for (int q2 = q1 + 1; q2 < n_; ++q2) {
          if (std::find(facet.begin(), facet.end(), q2) != facet.end())
            continue;
          bool crosses = false;
          try {
            crosses = segment_crosses_facet(s_.x[q1], s_.x[q2], verts);
          } catch (const Error&) {
            continue;
          }
          if (!crosses) continue;
          for (int c = 0; c < 2; ++c) {
            bool plus_part = (c == 0);
            int pieces = plus_part ? pp_ : pm_;
            const char* tag = plus_part ? "p" : "m";
            for (int j = 0; j < pieces; ++j) {
              for (int k = 0; k < pieces; ++k) {
                if (j == k) continue;
                if (cuts_emitted_ >= cfg_.cut_budget) {
                  audit_.simplex_facet_rows =
                      model_.constraints.size() - before;
                  return;
                }
                std::vector<LinTerm> terms;
                for (int p : facet)
                  terms.push_back(
                      {model_.var_index("del_" + std::string(tag) + "_" +
                                        idx(p) + "_" + idx(j)),
                       1.0});
                terms.push_back({model_.var_index("del_" + std::string(tag) +
                                                  "_" + idx(q1) + "_" + idx(k)),
                                 1.0});
                terms.push_back({model_.var_index("del_" + std::string(tag) +
                                                  "_" + idx(q2) + "_" + idx(k)),
                                 1.0});
                std::string name =
                    "face_" + std::string(tag) + "_" + idx(j) + "_" + idx(k);
                for (int p : facet) name += "_" + idx(p);
                name += "_q" + idx(q1) + "_q" + idx(q2);
                add_row(name, std::move(terms), ConSense::LE,
                        static_cast<double>(d_) + 1.0);
                ++cuts_emitted_;
              }
            }
          }
        }
      }
      int i = d_ - 1;
      while (i >= 0 && facet[i] == n_ - d_ + i) --i;
      if (i < 0) break;
      ++facet[i];
      for (int j = i + 1; j < d_; ++j) facet[j] = facet[j - 1] + 1;
    }
    audit_.simplex_facet_rows = model_.constraints.size() - before;
  }

  // Adds the defining rows for an error-metric value held in `target`.
  void add_error_metric_rows(ObjectiveKind kind, int target) {
    if (kind == ObjectiveKind::MaxError) {
      for (int i = 0; i < n_; ++i)
        add_row("qmax_" + idx(i),
                {{target, 1.0}, {model_.var_index("e_" + idx(i)), -1.0}},
                ConSense::GE, 0.0);
    } else if (kind == ObjectiveKind::MeanError) {
      std::vector<LinTerm> terms{{target, 1.0}};
      for (int i = 0; i < n_; ++i)
        terms.push_back({model_.var_index("e_" + idx(i)), -1.0 / n_});
      add_row("qmean", std::move(terms), ConSense::EQ, 0.0);
    } else {
      throw build_error("unsupported error metric in objective");
    }
  }

  void add_piece_count_rows(ObjectiveKind kind, int target) {
    if (kind == ObjectiveKind::PieceCountF) {
      std::vector<LinTerm> terms{{target, 1.0}};
      for (int j = 0; j < pp_; ++j)
        for (int k = 0; k < pm_; ++k)
          terms.push_back({model_.var_index("gam_" + idx(j) + "_" + idx(k)), -1.0});
      add_row("qpieces", std::move(terms), ConSense::EQ, 0.0);
      return;
    }
    bool plus_part = kind == ObjectiveKind::PieceCountFplus;
    const char* tag = plus_part ? "alp_" : "alm_";
    int pieces = plus_part ? pp_ : pm_;
    for (int j = 0; j < pieces; ++j) {
      int alpha = model_.var_index(tag + idx(j));
      int other = plus_part ? pm_ : pp_;
      for (int k = 0; k < other; ++k) {
        int gam = plus_part
                      ? model_.var_index("gam_" + idx(j) + "_" + idx(k))
                      : model_.var_index("gam_" + idx(k) + "_" + idx(j));
        add_row("alge_" + std::string(plus_part ? "p" : "m") + "_" + idx(j) +
                    "_" + idx(k),
                {{alpha, 1.0}, {gam, -1.0}}, ConSense::GE, 0.0);
      }
    }
    std::vector<LinTerm> terms{{target, 1.0}};
    for (int j = 0; j < pieces; ++j) terms.push_back({model_.var_index(tag + idx(j)), -1.0});
    add_row("qpieces", std::move(terms), ConSense::EQ, 0.0);
  }

  void add_objective() {
    int q = model_.var_index("Q");
    switch (obj_.kind) {
      case ObjectiveKind::MaxError:
      case ObjectiveKind::MeanError:
        add_error_metric_rows(obj_.kind, q);
        break;
      case ObjectiveKind::PieceCountF:
      case ObjectiveKind::PieceCountFplus:
      case ObjectiveKind::PieceCountFminus:
        add_piece_count_rows(obj_.kind, q);
        break;
      case ObjectiveKind::Hierarchical: {
        int q1 = model_.var_index("Q1");
        int q2 = model_.var_index("Q2");
        if (!objective_uses_gamma(obj_.primary))
          throw build_error("hierarchical primary must be a piece count");
        add_piece_count_rows(obj_.primary, q1);
        add_error_metric_rows(obj_.secondary, q2);
        add_row("qhier",
                {{q, 1.0}, {q1, -1.0}, {q2, -1.0 / (2.0 * params_.eps)}},
                ConSense::EQ, 0.0);
        break;
      }
    }
    model_.objective = {{q, 1.0}};
  }

  const DataSet& s_;
  const FitParams& params_;
  const Objective& obj_;
  const TighteningConfig& cfg_;
  const BoundsBundle* bounds_;
  int n_, d_, pp_, pm_;
  std::size_t cuts_emitted_ = 0;
  ModelIR model_;
  ModelSizeAudit audit_;
};

}  // namespace

BuildResult build(const DataSet& s, const FitParams& params,
                  const Objective& obj, const TighteningConfig& cfg,
                  const BoundsBundle* bounds) {
  return ModelBuilder(s, params, obj, cfg, bounds).run();
}

ExtractedSolution extract_solution(const std::map<std::string, double>& values,
                                   const ModelIR& model, const DataSet& s,
                                   const FitParams& params, double feas_tol) {
  int n = s.size();
  int d = s.dim;
  int pp = params.pieces_plus;
  int pm = params.pieces_minus;

  ExtractedSolution out;
  std::vector<double> val(model.variables.size(), 0.0);
  for (std::size_t v = 0; v < model.variables.size(); ++v) {
    auto it = values.find(model.variables[v].name);
    if (it == values.end()) {
      out.assignment.missing.push_back(model.variables[v].name);
      // Presolve may drop fixed variables; fall back to a bound when
      // zero is outside the variable's range.
      const auto& var = model.variables[v];
      if (var.lb > 0.0) val[v] = var.lb;
      else if (var.ub < 0.0) val[v] = var.ub;
      else val[v] = 0.0;
    } else {
      val[v] = it->second;
    }
  }

  auto get = [&](const std::string& name) { return val[model.var_index(name)]; };

  for (int j = 0; j < pp; ++j) {
    AffinePiece p;
    p.a.resize(d);
    for (int r = 0; r < d; ++r) p.a[r] = get("ap_" + idx(j) + "_" + idx(r));
    p.b = get("bp_" + idx(j));
    out.function.plus.pieces.push_back(std::move(p));
  }
  for (int k = 0; k < pm; ++k) {
    AffinePiece p;
    p.a.resize(d);
    for (int r = 0; r < d; ++r) p.a[r] = get("am_" + idx(k) + "_" + idx(r));
    p.b = get("bm_" + idx(k));
    out.function.minus.pieces.push_back(std::move(p));
  }

  out.assignment.delta_plus.assign(n, std::vector<int>(pp, 0));
  out.assignment.delta_minus.assign(n, std::vector<int>(pm, 0));
  out.assignment.errors.resize(n);
  for (int i = 0; i < n; ++i) {
    out.assignment.errors[i] = get("e_" + idx(i));
    for (int j = 0; j < pp; ++j)
      out.assignment.delta_plus[i][j] =
          get("del_p_" + idx(i) + "_" + idx(j)) >= 0.5 ? 1 : 0;
    for (int k = 0; k < pm; ++k)
      out.assignment.delta_minus[i][k] =
          get("del_m_" + idx(i) + "_" + idx(k)) >= 0.5 ? 1 : 0;
  }

  // Substitute rounded binaries, then evaluate every row.
  for (std::size_t v = 0; v < model.variables.size(); ++v)
    if (model.variables[v].type == VarType::Binary)
      val[v] = val[v] >= 0.5 ? 1.0 : 0.0;

  double worst = 0.0;
  std::string worst_row;
  auto eval_row = [&](const Constraint& c) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * val[t.var];
    double viol = 0.0;
    if (c.sense == ConSense::LE) viol = lhs - c.rhs;
    else if (c.sense == ConSense::GE) viol = c.rhs - lhs;
    else viol = std::abs(lhs - c.rhs);
    if (viol > worst) {
      worst = viol;
      worst_row = c.name;
    }
  };
  for (const auto& c : model.constraints) eval_row(c);
  for (const auto& ic : model.indicators)
    if (val[ic.bin_var] == static_cast<double>(ic.active_value))
      eval_row(ic.row);
  out.assignment.worst_violation = worst;

  double obj = model.objective_offset;
  for (const auto& t : model.objective) obj += t.coef * val[t.var];
  out.assignment.objective_value = obj;

  if (worst > feas_tol)
    throw numerical_error("incumbent violates row '" + worst_row + "' by " +
                          std::to_string(worst));
  return out;
}

}  // namespace cpwlfit
