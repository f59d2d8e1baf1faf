// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CPWLFIT_MODEL_HPP
#define CPWLFIT_MODEL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpwlfit/cpwl.hpp"
#include "cpwlfit/dataset.hpp"
#include "cpwlfit/preprocess.hpp"

namespace cpwlfit {

struct FitParams {
  double eps = 0.0;
  int pieces_plus = 1;   // P^+
  int pieces_minus = 1;  // P^-
};

enum class ObjectiveKind {
  MaxError,
  MeanError,
  PieceCountF,       // number of nonempty (j,k) pair domains
  PieceCountFplus,
  PieceCountFminus,
  Hierarchical,      // piece count first, error second, weight 1/(2 eps)
};

struct Objective {
  ObjectiveKind kind = ObjectiveKind::MaxError;
  // Hierarchical components: primary is a piece count, secondary an
  // error metric.
  ObjectiveKind primary = ObjectiveKind::PieceCountF;
  ObjectiveKind secondary = ObjectiveKind::MaxError;
};

enum class PointsPerPiece { None, PerConvexPart, PerF };
enum class BigMMode { Indicator, Default, Tight };
enum class SimplexCuts { None, PointInSimplex, Both };

struct TighteningConfig {
  bool fix_first_piece = false;
  bool sort_pieces = false;
  PointsPerPiece points_per_piece = PointsPerPiece::None;
  BigMMode bigm_mode = BigMMode::Default;
  bool bound_variables = false;
  bool monotonicity_cuts = false;
  SimplexCuts simplex_cuts = SimplexCuts::None;

  // Overrides the preprocessing-derived scalar in Default mode.
  std::optional<double> default_bigm_override;
  // Generated-cut row budget, deterministic lexicographic selection.
  std::size_t cut_budget = 50000;
  // PerF is rejected above this many beta variables.
  std::size_t perf_variable_cap = 50000000;
};

/// The Table-3 presets C1..C11.
TighteningConfig preset(const std::string& id);

enum class VarType { Continuous, Binary };

struct Variable {
  std::string name;
  double lb;
  double ub;
  VarType type = VarType::Continuous;
};

struct LinTerm {
  int var = 0;
  double coef = 0.0;
};

enum class ConSense { LE, GE, EQ };

struct Constraint {
  std::string name;
  std::vector<LinTerm> terms;
  ConSense sense = ConSense::LE;
  double rhs = 0.0;
};

/// bin_var = active_value  =>  row holds.
struct IndicatorConstraint {
  int bin_var = 0;
  int active_value = 1;
  Constraint row;
};

/// Solver-agnostic MILP. Variable order is deterministic, so repeated
/// builds serialize byte-identically.
struct ModelIR {
  std::string name;
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<IndicatorConstraint> indicators;
  std::vector<LinTerm> objective;  // minimized
  double objective_offset = 0.0;
  // Symbol name -> variable index, e.g. "f_3", "ap_2_1", "del_p_4_2".
  std::map<std::string, int> catalog;

  int var_index(const std::string& symbol) const;
  std::string to_json() const;
};

/// Closed-form size deltas per strategy (audit support).
struct ModelSizeAudit {
  std::size_t base_rows = 0;
  std::size_t base_cols = 0;
  std::size_t base_binaries = 0;
  std::size_t sort_rows = 0;
  std::size_t per_convex_rows = 0;
  std::size_t perf_rows = 0;
  std::size_t perf_cols = 0;
  std::size_t fix_bound_count = 0;
  std::size_t variable_bound_count = 0;
  std::size_t monotonicity_rows = 0;
  std::size_t simplex_point_rows = 0;
  std::size_t simplex_facet_rows = 0;
};

struct BuildResult {
  ModelIR model;
  ModelSizeAudit audit;
};

/// Assembles MILP1(Q) with the requested tightening strategies.
/// `bounds` is required for Tight and Default big-M modes and for
/// bound_variables / monotonicity_cuts (unless an override is set).
BuildResult build(const DataSet& s, const FitParams& params,
                  const Objective& obj, const TighteningConfig& cfg,
                  const BoundsBundle* bounds = nullptr);

/// Rounds the maximum tight M_i^c up to one significant digit
/// (632.8 -> 700).
double default_bigM(const std::vector<double>& m_minus,
                    const std::vector<double>& m_plus);
double round_up_one_significant(double v);

struct SolutionAssignment {
  std::vector<std::vector<int>> delta_plus;   // N x P^+, rounded 0/1
  std::vector<std::vector<int>> delta_minus;  // N x P^-
  std::vector<double> errors;                 // e_i
  double objective_value = 0.0;
  double worst_violation = 0.0;
  std::vector<std::string> missing;  // catalog entries absent from map
};

struct ExtractedSolution {
  DCFunction function;
  SolutionAssignment assignment;
};

/// Maps solver variable values back onto a DCFunction. The rounded
/// deltas are checked against the big-M rows; a violation beyond
/// `feas_tol` raises a diagnostic error.
ExtractedSolution extract_solution(const std::map<std::string, double>& values,
                                   const ModelIR& model, const DataSet& s,
                                   const FitParams& params,
                                   double feas_tol = 1e-6);

}  // namespace cpwlfit

#endif  // CPWLFIT_MODEL_HPP
