// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: fit / bench / preprocess / verify /
// wellbehave / gen-data / export-plot.
//
// Exit codes: 0 success, 2 infeasible, 3 solver or numerical error,
// 4 validation error.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cpwlfit/cpwl.hpp"
#include "cpwlfit/dataset.hpp"
#include "cpwlfit/error.hpp"
#include "cpwlfit/model.hpp"
#include "cpwlfit/preprocess.hpp"
#include "cpwlfit/solver.hpp"
#include "cpwlfit/wellbehave.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cpwlfit;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

struct Opts {
  // Data source.
  std::string data;        // CSV path
  std::string function;    // synthetic function name
  int n = 25;
  std::uint64_t seed = 1;
  std::string mode = "random";
  std::vector<double> box_lo, box_hi;
  bool no_rescale = false;

  // Fit parameters.
  double eps = 0.1;
  int pp = 3, pm = 3;
  std::string objective = "maxerror";
  std::string hier_primary = "pieces";
  std::string hier_secondary = "maxerror";

  // Tightening.
  std::string preset_id;
  bool fix_first = false, sort_pieces = false, bound_vars = false;
  bool mono_cuts = false;
  std::string points_per = "none";   // none|part|f
  std::string bigm = "default";      // indicator|default|tight
  double bigm_value = 0.0;
  std::string simplex = "none";      // none|point|both
  std::size_t cut_budget = 50000;

  // Solver.
  std::string backend = "highs-js";
  std::string solver_exe;
  double time_limit = 7200.0;
  double mip_gap = 1e-6;
  int solver_threads = 1;
  bool keep_files = false;

  // IO.
  std::string bounds_path;  // cache
  std::string out_dir = ".";
  std::string in_path;      // fit.json input
  std::string out_path;     // single-file output
  int threads = 0;          // preprocessing
  std::vector<std::string> presets;  // bench
  int grid = 25;            // export-plot
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw validation_error("cannot write '" + path + "'");
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw validation_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

DataSet load_data(const Opts& o) {
  if (!o.data.empty()) return load_csv(o.data);
  if (o.function.empty())
    throw validation_error("provide --data CSV or --function NAME");
  SyntheticSpec spec;
  spec.function = synthetic_function_from_name(o.function);
  int d = synthetic_arity(spec.function);
  spec.box_lo = o.box_lo.empty() ? std::vector<double>(d, -1.0) : o.box_lo;
  spec.box_hi = o.box_hi.empty() ? std::vector<double>(d, 1.0) : o.box_hi;
  if (static_cast<int>(spec.box_lo.size()) != d ||
      static_cast<int>(spec.box_hi.size()) != d)
    throw validation_error("--box-lo/--box-hi need " + std::to_string(d) +
                           " entries for " + o.function);
  spec.count = o.n;
  spec.seed = o.seed;
  if (o.mode == "grid") spec.mode = SamplingMode::Grid;
  else if (o.mode == "random") spec.mode = SamplingMode::UniformRandom;
  else throw validation_error("--mode must be grid or random");
  return generate(spec);
}

Objective parse_objective(const Opts& o) {
  auto kind = [](const std::string& s) {
    if (s == "maxerror") return ObjectiveKind::MaxError;
    if (s == "meanerror") return ObjectiveKind::MeanError;
    if (s == "pieces") return ObjectiveKind::PieceCountF;
    if (s == "pieces-plus") return ObjectiveKind::PieceCountFplus;
    if (s == "pieces-minus") return ObjectiveKind::PieceCountFminus;
    if (s == "hierarchical") return ObjectiveKind::Hierarchical;
    throw validation_error("unknown objective '" + s + "'");
  };
  Objective obj;
  obj.kind = kind(o.objective);
  if (obj.kind == ObjectiveKind::Hierarchical) {
    obj.primary = kind(o.hier_primary);
    obj.secondary = kind(o.hier_secondary);
  }
  return obj;
}

TighteningConfig parse_tightening(const Opts& o, const CLI::App* cmd) {
  TighteningConfig cfg;
  if (!o.preset_id.empty()) cfg = preset(o.preset_id);
  auto passed = [&](const std::string& flag) {
    return cmd->count(flag) > 0;
  };
  if (passed("--fix-first")) cfg.fix_first_piece = o.fix_first;
  if (passed("--sort-pieces")) cfg.sort_pieces = o.sort_pieces;
  if (passed("--bound-vars")) cfg.bound_variables = o.bound_vars;
  if (passed("--mono-cuts")) cfg.monotonicity_cuts = o.mono_cuts;
  if (passed("--points-per")) {
    if (o.points_per == "none") cfg.points_per_piece = PointsPerPiece::None;
    else if (o.points_per == "part") cfg.points_per_piece = PointsPerPiece::PerConvexPart;
    else if (o.points_per == "f") cfg.points_per_piece = PointsPerPiece::PerF;
    else throw validation_error("--points-per must be none, part or f");
  }
  if (passed("--bigm")) {
    if (o.bigm == "indicator") cfg.bigm_mode = BigMMode::Indicator;
    else if (o.bigm == "default") cfg.bigm_mode = BigMMode::Default;
    else if (o.bigm == "tight") cfg.bigm_mode = BigMMode::Tight;
    else throw validation_error("--bigm must be indicator, default or tight");
  }
  if (passed("--bigm-value")) cfg.default_bigm_override = o.bigm_value;
  if (passed("--simplex-cuts")) {
    if (o.simplex == "none") cfg.simplex_cuts = SimplexCuts::None;
    else if (o.simplex == "point") cfg.simplex_cuts = SimplexCuts::PointInSimplex;
    else if (o.simplex == "both") cfg.simplex_cuts = SimplexCuts::Both;
    else throw validation_error("--simplex-cuts must be none, point or both");
  }
  if (passed("--cut-budget")) cfg.cut_budget = o.cut_budget;
  return cfg;
}

SolverSpec parse_solver(const Opts& o) {
  SolverSpec spec;
  spec.backend = o.backend;
  spec.executable = o.solver_exe;
  spec.time_limit_sec = o.time_limit;
  spec.mip_gap = o.mip_gap;
  spec.threads = o.solver_threads;
  spec.keep_files = o.keep_files;
  return spec;
}

bool config_needs_bounds(const TighteningConfig& cfg) {
  return cfg.bigm_mode == BigMMode::Tight || cfg.bound_variables ||
         cfg.monotonicity_cuts ||
         (cfg.bigm_mode == BigMMode::Default && !cfg.default_bigm_override);
}

/// Loads the bounds cache when present, computes (and stores) it
/// otherwise.
BoundsBundle obtain_bounds(const Opts& o, const DataSet& s, double* seconds) {
  if (!o.bounds_path.empty() && fs::exists(o.bounds_path)) {
    *seconds = 0.0;
    return BoundsBundle::from_json(read_file(o.bounds_path));
  }
  Timer t;
  BoundsBundle b = compute_bounds(s, o.eps, o.pp, o.pm, o.threads);
  *seconds = t.seconds();
  if (!o.bounds_path.empty()) write_file(o.bounds_path, b.to_json());
  return b;
}

/// Maps a fit on [0,1]-scaled coordinates back to raw units. The z
/// offset lands in the plus part's intercepts.
DCFunction unscale_function(const DCFunction& f, const ScalingInfo& info) {
  int d = static_cast<int>(info.offset.size()) - 1;
  double sz = info.scale[d], oz = info.offset[d];
  auto map_part = [&](const ConvexPWL& part, bool add_offset) {
    ConvexPWL out;
    for (const auto& p : part.pieces) {
      AffinePiece q;
      q.a.resize(d);
      double b = p.b;
      for (int r = 0; r < d; ++r) {
        q.a[r] = sz * p.a[r] / info.scale[r];
        b -= p.a[r] * info.offset[r] / info.scale[r];
      }
      q.b = sz * b + (add_offset ? oz : 0.0);
      out.pieces.push_back(std::move(q));
    }
    return out;
  };
  DCFunction out;
  out.plus = map_part(f.plus, true);
  out.minus = map_part(f.minus, false);
  return out;
}

int status_exit_code(SolveStatus st) {
  switch (st) {
    case SolveStatus::Infeasible: return 2;
    case SolveStatus::Optimal:
    case SolveStatus::FeasibleTimeLimit: return 0;
    default: return 3;
  }
}

struct PipelineRow {
  std::string id;
  double build_sec = 0.0, solve_sec = 0.0;
  SolveStatus status = SolveStatus::Error;
  double objective = 0.0, gap = 0.0;
  std::size_t rows = 0, cols = 0, binaries = 0;
  std::string message;
};

/// build + solve + extract + verify on an already-scaled data set.
PipelineRow run_combination(const DataSet& scaled, const FitParams& params,
                            const Objective& obj, const TighteningConfig& cfg,
                            const BoundsBundle* bounds, const SolverSpec& sspec,
                            const std::string& id, DCFunction* fit_out,
                            FitReport* report_out) {
  PipelineRow row;
  row.id = id;
  Timer tb;
  BuildResult built = build(scaled, params, obj, cfg, bounds);
  row.build_sec = tb.seconds();
  row.rows = built.model.constraints.size() + built.model.indicators.size();
  row.cols = built.model.variables.size();
  row.binaries = built.audit.base_binaries;

  Timer ts;
  SolveOutcome out = solve(built.model, sspec);
  row.solve_sec = ts.seconds();
  row.status = out.status;
  row.objective = out.objective;
  row.gap = out.gap;
  row.message = out.message;
  if (out.status != SolveStatus::Optimal &&
      out.status != SolveStatus::FeasibleTimeLimit)
    return row;

  ExtractedSolution sol =
      extract_solution(out.values, built.model, scaled, params);
  FitReport fit = verify_eps_approx(sol.function, scaled, params.eps);
  if (out.status == SolveStatus::Optimal && !fit.feasible)
    throw numerical_error(
        "solver reported Optimal but the fit violates eps at point " +
        std::to_string(fit.worst_point + 1) + " (error " +
        std::to_string(fit.max_abs_error) + ")");
  if (fit_out) *fit_out = sol.function;
  if (report_out) *report_out = fit;
  return row;
}

json row_to_json(const PipelineRow& r, double pre_sec) {
  json j;
  j["combination"] = r.id;
  j["preprocess_sec"] = pre_sec;
  j["build_sec"] = r.build_sec;
  j["solve_sec"] = r.solve_sec;
  j["status"] = to_string(r.status);
  j["objective"] = r.objective;
  j["gap"] = r.gap;
  j["rows"] = r.rows;
  j["cols"] = r.cols;
  j["binaries"] = r.binaries;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

int cmd_fit(const Opts& o, const CLI::App* cmd) {
  DataSet raw = load_data(o);
  raw.validate();
  DataSet scaled = raw;
  ScalingInfo info;
  if (!o.no_rescale) std::tie(scaled, info) = rescale(raw);

  TighteningConfig cfg = parse_tightening(o, cmd);
  Objective obj = parse_objective(o);
  FitParams params{o.eps, o.pp, o.pm};
  SolverSpec sspec = parse_solver(o);

  double pre_sec = 0.0;
  std::optional<BoundsBundle> bounds;
  if (config_needs_bounds(cfg)) bounds = obtain_bounds(o, scaled, &pre_sec);

  DCFunction fit;
  FitReport fit_report;
  PipelineRow row = run_combination(
      scaled, params, obj, cfg, bounds ? &*bounds : nullptr, sspec,
      o.preset_id.empty() ? "custom" : o.preset_id, &fit, &fit_report);

  fs::create_directories(o.out_dir);
  json report = row_to_json(row, pre_sec);
  report["dataset"] = {{"name", raw.name}, {"n", raw.size()}, {"d", raw.dim}};
  report["eps"] = o.eps;
  report["pieces_plus"] = o.pp;
  report["pieces_minus"] = o.pm;
  int code = status_exit_code(row.status);
  if (code == 0) {
    DCFunction raw_fit = o.no_rescale ? fit : unscale_function(fit, info);
    write_file((fs::path(o.out_dir) / "fit.json").string(), raw_fit.to_json());
    report["fit"] = json::parse(fit_report.to_json());
  }
  write_file((fs::path(o.out_dir) / "report.json").string(), report.dump(2));
  std::cout << report.dump(2) << "\n";
  return code;
}

int cmd_bench(const Opts& o, const CLI::App* cmd) {
  if (o.presets.empty())
    throw validation_error("bench needs --presets (e.g. --presets C2,C3,C9)");
  DataSet raw = load_data(o);
  raw.validate();
  DataSet scaled = raw;
  ScalingInfo info;
  if (!o.no_rescale) std::tie(scaled, info) = rescale(raw);

  Objective obj = parse_objective(o);
  FitParams params{o.eps, o.pp, o.pm};
  SolverSpec sspec = parse_solver(o);

  // One shared bounds bundle across combinations.
  bool any_needs = false;
  std::vector<TighteningConfig> cfgs;
  for (const auto& id : o.presets) {
    Opts po = o;
    po.preset_id = id;
    cfgs.push_back(parse_tightening(po, cmd));
    any_needs = any_needs || config_needs_bounds(cfgs.back());
  }
  double pre_sec = 0.0;
  std::optional<BoundsBundle> bounds;
  if (any_needs) bounds = obtain_bounds(o, scaled, &pre_sec);

  json rows = json::array();
  std::vector<PipelineRow> results;
  for (std::size_t c = 0; c < cfgs.size(); ++c) {
    PipelineRow row;
    try {
      row = run_combination(scaled, params, obj, cfgs[c],
                            bounds ? &*bounds : nullptr, sspec, o.presets[c],
                            nullptr, nullptr);
    } catch (const Error& e) {
      row.id = o.presets[c];
      row.status = SolveStatus::Error;
      row.message = e.what();
    }
    results.push_back(row);
    rows.push_back(row_to_json(row, pre_sec));
  }

  // Optimal objectives must coincide across combinations.
  double lo = 0.0, hi = 0.0, scale = 0.0;
  bool first = true, any_optimal = false;
  for (const auto& r : results) {
    if (r.status != SolveStatus::Optimal) continue;
    any_optimal = true;
    if (first) { lo = hi = r.objective; first = false; }
    lo = std::min(lo, r.objective);
    hi = std::max(hi, r.objective);
    scale = std::max(scale, std::abs(r.objective));
  }
  bool agree = !any_optimal || (hi - lo) <= 10.0 * o.mip_gap * std::max(scale, 1.0);

  json report;
  report["dataset"] = {{"name", raw.name}, {"n", raw.size()}, {"d", raw.dim}};
  report["eps"] = o.eps;
  report["pieces_plus"] = o.pp;
  report["pieces_minus"] = o.pm;
  report["preprocess_sec"] = pre_sec;
  report["rows"] = rows;
  report["objectives_agree"] = agree;
  report["backend"] = o.backend;

  std::ostringstream md;
  md << "| Combination | Build (s) | Solve (s) | Status | Objective |\n";
  md << "|---|---|---|---|---|\n";
  for (const auto& r : results) {
    bool starred = r.status == SolveStatus::FeasibleTimeLimit;
    md << "| " << r.id << " | " << r.build_sec << " | " << r.solve_sec
       << (starred ? "*" : "") << " | " << to_string(r.status) << " | "
       << r.objective << " |\n";
  }
  md << "\nPreprocessing: " << pre_sec << " s. '*' marks rows that hit the "
     << "time limit.\n";

  fs::create_directories(o.out_dir);
  write_file((fs::path(o.out_dir) / "bench.json").string(), report.dump(2));
  write_file((fs::path(o.out_dir) / "bench.md").string(), md.str());
  std::cout << md.str();
  if (!agree) {
    std::cerr << "warning: optimal objectives disagree across combinations\n";
  }
  return 0;
}

int cmd_preprocess(const Opts& o) {
  DataSet raw = load_data(o);
  raw.validate();
  DataSet scaled = raw;
  ScalingInfo info;
  if (!o.no_rescale) std::tie(scaled, info) = rescale(raw);
  Timer t;
  BoundsBundle b = compute_bounds(scaled, o.eps, o.pp, o.pm, o.threads);
  std::string out = o.out_path.empty() ? "bounds.json" : o.out_path;
  write_file(out, b.to_json());
  std::cerr << "wrote " << out << " in " << t.seconds() << " s\n";
  return 0;
}

int cmd_verify(const Opts& o) {
  DCFunction f = DCFunction::from_json(read_file(o.in_path));
  DataSet s = load_data(o);
  FitReport r = verify_eps_approx(f, s, o.eps);
  std::cout << r.to_json() << "\n";
  return r.feasible ? 0 : 2;
}

int cmd_wellbehave(const Opts& o) {
  DCFunction f = DCFunction::from_json(read_file(o.in_path));
  DataSet s = load_data(o);
  TransformReport r = transform(f, s, o.eps);
  std::string out = o.out_path.empty() ? "fit_wb.json" : o.out_path;
  write_file(out, r.function.to_json());
  json j;
  j["well_behaved"] = r.well_behaved;
  j["tilt_count"] = r.tilt_count;
  json coupled = json::array();
  for (auto [a, b] : r.coupled_pairs) coupled.push_back({a, b});
  j["coupled_pairs"] = coupled;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_gen_data(const Opts& o) {
  if (o.function.empty()) throw validation_error("gen-data needs --function");
  Opts go = o;
  go.data.clear();
  DataSet s = load_data(go);
  std::string out = o.out_path.empty() ? (s.name + ".csv") : o.out_path;
  save_csv(s, out);
  std::cerr << "wrote " << out << " (" << s.size() << " points, d=" << s.dim
            << ")\n";
  return 0;
}

int cmd_export_plot(const Opts& o) {
  DCFunction f = DCFunction::from_json(read_file(o.in_path));
  int d = f.plus.pieces.empty() ? 0 : f.plus.pieces[0].dim();
  if (d < 1) throw validation_error("fit has no pieces");
  std::vector<double> lo(d, -1.0), hi(d, 1.0);
  if (!o.data.empty()) {
    DataSet s = load_csv(o.data);
    if (s.dim != d) throw validation_error("data dimension mismatch");
    for (int r = 0; r < d; ++r) {
      lo[r] = hi[r] = s.x[0][r];
      for (const auto& x : s.x) {
        lo[r] = std::min(lo[r], x[r]);
        hi[r] = std::max(hi[r], x[r]);
      }
    }
  } else if (!o.box_lo.empty() && !o.box_hi.empty()) {
    lo = o.box_lo;
    hi = o.box_hi;
  }
  if (static_cast<int>(lo.size()) != d)
    throw validation_error("--box-lo/--box-hi dimension mismatch");
  int g = std::max(2, o.grid);
  double total = std::pow(static_cast<double>(g), d);
  if (total > 1e6) throw validation_error("lattice too large; lower --grid");

  std::string out = o.out_path.empty() ? "lattice.csv" : o.out_path;
  std::ofstream file(out);
  if (!file) throw validation_error("cannot write '" + out + "'");
  for (int r = 0; r < d; ++r) file << "x" << (r + 1) << ",";
  file << "f\n";
  std::vector<int> index(d, 0);
  std::vector<double> x(d);
  while (true) {
    for (int r = 0; r < d; ++r)
      x[r] = lo[r] + (hi[r] - lo[r]) * index[r] / (g - 1);
    char buf[32];
    for (int r = 0; r < d; ++r) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[r]);
      file << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", f.eval(x));
    file << buf << "\n";
    int r = d - 1;
    while (r >= 0 && ++index[r] == g) index[r--] = 0;
    if (r < 0) break;
  }
  std::cerr << "wrote " << out << "\n";
  return 0;
}

void load_config_file(int argc, char** argv, Opts* o) {
  std::string path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") path = argv[i + 1];
  if (path.empty()) return;
  json j = json::parse(read_file(path));
  auto opt = [&](const char* key, auto* field) {
    if (j.contains(key)) *field = j[key].get<std::decay_t<decltype(*field)>>();
  };
  opt("data", &o->data);
  opt("function", &o->function);
  opt("n", &o->n);
  opt("seed", &o->seed);
  opt("mode", &o->mode);
  opt("box_lo", &o->box_lo);
  opt("box_hi", &o->box_hi);
  opt("no_rescale", &o->no_rescale);
  opt("eps", &o->eps);
  opt("pieces_plus", &o->pp);
  opt("pieces_minus", &o->pm);
  opt("objective", &o->objective);
  opt("preset", &o->preset_id);
  opt("backend", &o->backend);
  opt("time_limit", &o->time_limit);
  opt("mip_gap", &o->mip_gap);
  opt("threads", &o->threads);
  opt("bounds", &o->bounds_path);
  opt("out_dir", &o->out_dir);
  opt("presets", &o->presets);
}

}  // namespace

int main(int argc, char** argv) {
  Opts o;
  try {
    load_config_file(argc, argv, &o);
  } catch (const std::exception& e) {
    std::cerr << json({{"error", {{"kind", "validation"}, {"message", e.what()}}}})
              << "\n";
    return 4;
  }

  CLI::App app{"Continuous piecewise-linear fitting via difference-of-convex MILP"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config; flags override");

  auto add_data_opts = [&](CLI::App* c) {
    c->add_option("--data", o.data, "CSV file with header x1..xd,z");
    c->add_option("--function", o.function,
                  "synthetic function: x2sinx1 | x1sq-x2sq | sumsq3 | xyz");
    c->add_option("--n", o.n, "number of synthetic points");
    c->add_option("--seed", o.seed, "sampling seed");
    c->add_option("--mode", o.mode, "grid | random");
    c->add_option("--box-lo", o.box_lo, "sampling box lower corner")->delimiter(',');
    c->add_option("--box-hi", o.box_hi, "sampling box upper corner")->delimiter(',');
  };
  auto add_fit_opts = [&](CLI::App* c) {
    c->add_option("--eps", o.eps, "error tolerance (scaled units)");
    c->add_option("--pp", o.pp, "pieces in the plus part");
    c->add_option("--pm", o.pm, "pieces in the minus part");
    c->add_option("--objective", o.objective,
                  "maxerror | meanerror | pieces | pieces-plus | pieces-minus "
                  "| hierarchical");
    c->add_option("--hier-primary", o.hier_primary, "hierarchical piece count");
    c->add_option("--hier-secondary", o.hier_secondary, "hierarchical error metric");
    c->add_flag("--no-rescale", o.no_rescale, "skip min-max scaling to [0,1]");
    c->add_option("--bounds", o.bounds_path, "bounds cache file (read or write)");
    c->add_option("--threads", o.threads, "preprocessing threads (0 = auto)");
  };
  auto add_tight_opts = [&](CLI::App* c) {
    c->add_option("--preset", o.preset_id, "tightening preset C1..C11");
    c->add_flag("--fix-first", o.fix_first, "pin the first minus piece to zero");
    c->add_flag("--sort-pieces", o.sort_pieces, "order pieces by first coefficient");
    c->add_option("--points-per", o.points_per, "none | part | f");
    c->add_option("--bigm", o.bigm, "indicator | default | tight");
    c->add_option("--bigm-value", o.bigm_value, "explicit default big-M");
    c->add_flag("--bound-vars", o.bound_vars, "tighten variable bounds");
    c->add_flag("--mono-cuts", o.mono_cuts, "coefficient monotonicity cuts");
    c->add_option("--simplex-cuts", o.simplex, "none | point | both");
    c->add_option("--cut-budget", o.cut_budget, "max generated cut rows");
  };
  auto add_solver_opts = [&](CLI::App* c) {
    c->add_option("--backend", o.backend, "highs-js | highs | cbc | gurobi");
    c->add_option("--solver-exe", o.solver_exe, "explicit solver executable");
    c->add_option("--time-limit", o.time_limit, "solver time limit (s)");
    c->add_option("--mip-gap", o.mip_gap, "relative MIP gap");
    c->add_option("--solver-threads", o.solver_threads, "solver threads");
    c->add_flag("--keep-files", o.keep_files, "keep model/solution/log files");
  };

  CLI::App* fit = app.add_subcommand("fit", "fit a CPWL function");
  add_data_opts(fit);
  add_fit_opts(fit);
  add_tight_opts(fit);
  add_solver_opts(fit);
  fit->add_option("--out-dir", o.out_dir, "output directory");

  CLI::App* bench = app.add_subcommand("bench", "compare tightening presets");
  add_data_opts(bench);
  add_fit_opts(bench);
  add_tight_opts(bench);
  add_solver_opts(bench);
  bench->add_option("--presets", o.presets, "comma-separated preset ids")
      ->delimiter(',');
  bench->add_option("--out-dir", o.out_dir, "output directory");

  CLI::App* pre = app.add_subcommand("preprocess", "compute the bounds bundle");
  add_data_opts(pre);
  add_fit_opts(pre);
  pre->add_option("--out", o.out_path, "output path (bounds.json)");

  CLI::App* verify = app.add_subcommand("verify", "check a fit against data");
  add_data_opts(verify);
  verify->add_option("--in", o.in_path, "fit JSON")->required();
  verify->add_option("--eps", o.eps, "error tolerance");

  CLI::App* wb = app.add_subcommand("wellbehave", "well-behaving transform");
  add_data_opts(wb);
  wb->add_option("--in", o.in_path, "fit JSON")->required();
  wb->add_option("--eps", o.eps, "error tolerance");
  wb->add_option("--out", o.out_path, "output path (fit_wb.json)");

  CLI::App* gen = app.add_subcommand("gen-data", "sample a synthetic data set");
  add_data_opts(gen);
  gen->add_option("--out", o.out_path, "output CSV path");

  CLI::App* plot = app.add_subcommand("export-plot", "evaluate a fit on a lattice");
  plot->add_option("--in", o.in_path, "fit JSON")->required();
  plot->add_option("--data", o.data, "CSV fixing the lattice bounding box");
  plot->add_option("--box-lo", o.box_lo, "lattice lower corner")->delimiter(',');
  plot->add_option("--box-hi", o.box_hi, "lattice upper corner")->delimiter(',');
  plot->add_option("--grid", o.grid, "lattice points per dimension");
  plot->add_option("--out", o.out_path, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return cmd_fit(o, fit);
    if (bench->parsed()) return cmd_bench(o, bench);
    if (pre->parsed()) return cmd_preprocess(o);
    if (verify->parsed()) return cmd_verify(o);
    if (wb->parsed()) return cmd_wellbehave(o);
    if (gen->parsed()) return cmd_gen_data(o);
    if (plot->parsed()) return cmd_export_plot(o);
  } catch (const Error& e) {
    std::string kind;
    int code;
    switch (e.kind()) {
      case ErrorKind::Validation: kind = "validation"; code = 4; break;
      case ErrorKind::Parse: kind = "parse"; code = 4; break;
      case ErrorKind::Build: kind = "build"; code = 4; break;
      case ErrorKind::Solver: kind = "solver"; code = 3; break;
      default: kind = "numerical"; code = 3; break;
    }
    std::cerr << json({{"error", {{"kind", kind}, {"message", e.what()}}}}).dump()
              << "\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << json({{"error", {{"kind", "internal"}, {"message", e.what()}}}}).dump()
              << "\n";
    return 3;
  }
  return 0;
}
