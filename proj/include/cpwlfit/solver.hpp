// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CPWLFIT_SOLVER_HPP
#define CPWLFIT_SOLVER_HPP

#include <map>
#include <string>
#include <vector>

#include "cpwlfit/model.hpp"

namespace cpwlfit {

enum class ModelFormat { MPS, LP };

/// Deterministic emission, numeric literals with 17 significant
/// digits. Indicator constraints are only representable in LP format
/// for backends that read them.
void write_model(const ModelIR& m, ModelFormat format, const std::string& path,
                 bool allow_indicators = false);
std::string model_to_string(const ModelIR& m, ModelFormat format,
                            bool allow_indicators = false);

/// Minimal LP-format reader covering what write_model emits, for
/// round-trip checks and debugging.
ModelIR read_model_lp(const std::string& path);

struct SolverSpec {
  std::string backend = "highs-js";
  std::string executable;  // discovered when empty
  double time_limit_sec = 7200.0;
  double mip_gap = 1e-6;
  double feasibility_tol = 1e-9;
  double integrality_tol = 1e-9;
  int threads = 1;
  std::string work_dir;  // temp dir when empty
  bool keep_files = false;
};

enum class SolveStatus { Optimal, FeasibleTimeLimit, Infeasible, Unbounded, Error };

std::string to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Error;
  double objective = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double wall_time_sec = 0.0;
  std::map<std::string, double> values;
  std::string log_path;
  std::string message;
};

struct BackendCapabilities {
  std::string id;
  bool supports_indicators = false;
  // Flag mapping actually used when launching the process.
  std::map<std::string, std::string> flag_map;
};

/// Static capability record; throws on unknown backend ids.
BackendCapabilities backend_capabilities(const std::string& backend);
std::vector<std::string> known_backends();

/// Resolves the executable for a backend: explicit spec field, then
/// the CPWLFIT_<BACKEND> environment variable, then PATH lookup.
std::string discover_executable(const SolverSpec& spec);

/// Serializes the model, launches the backend subprocess and parses
/// its solution file. Exceeding time_limit + 30 s grace kills the
/// child; the status is taken from whatever output it left behind.
SolveOutcome solve(const ModelIR& m, const SolverSpec& spec);

}  // namespace cpwlfit

#endif  // CPWLFIT_SOLVER_HPP
