// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpwlfit/solver.hpp"

#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cctype>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cpwlfit/error.hpp"

namespace cpwlfit {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Merges repeated variables and drops zero coefficients, preserving
// first-occurrence order.
std::vector<LinTerm> merged_terms(const std::vector<LinTerm>& terms) {
  std::vector<LinTerm> out;
  std::map<int, std::size_t> seen;
  for (const auto& t : terms) {
    auto it = seen.find(t.var);
    if (it == seen.end()) {
      seen[t.var] = out.size();
      out.push_back(t);
    } else {
      out[it->second].coef += t.coef;
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const LinTerm& t) { return t.coef == 0.0; }),
            out.end());
  return out;
}

void append_terms(std::string& line, const ModelIR& m,
                  const std::vector<LinTerm>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    double c = t.coef;
    if (first) {
      line += c < 0 ? "- " : "";
      first = false;
    } else {
      line += c < 0 ? " - " : " + ";
    }
    line += num(std::abs(c)) + " " + m.variables[t.var].name;
  }
  if (first) line += "0 " + m.variables[0].name;
}

std::string sense_str(ConSense s) {
  switch (s) {
    case ConSense::LE: return "<=";
    case ConSense::GE: return ">=";
    default: return "=";
  }
}

std::string emit_lp(const ModelIR& m, bool allow_indicators) {
  if (!m.indicators.empty() && !allow_indicators)
    throw build_error(
        "model has indicator constraints but the output target does not "
        "accept them");
  std::string out;
  out += "\\Problem: " + m.name + "\n";
  out += "Minimize\n obj: ";
  append_terms(out, m, merged_terms(m.objective));
  if (m.objective_offset != 0.0)
    out += " + " + num(m.objective_offset);
  out += "\nSubject To\n";
  for (const auto& c : m.constraints) {
    out += " " + c.name + ": ";
    append_terms(out, m, merged_terms(c.terms));
    out += " " + sense_str(c.sense) + " " + num(c.rhs) + "\n";
  }
  for (const auto& ic : m.indicators) {
    out += " " + ic.row.name + ": " + m.variables[ic.bin_var].name + " = " +
           std::to_string(ic.active_value) + " -> ";
    append_terms(out, m, merged_terms(ic.row.terms));
    out += " " + sense_str(ic.row.sense) + " " + num(ic.row.rhs) + "\n";
  }
  out += "Bounds\n";
  for (const auto& v : m.variables) {
    if (v.type == VarType::Binary) continue;
    bool lb_inf = std::isinf(v.lb), ub_inf = std::isinf(v.ub);
    if (lb_inf && ub_inf) {
      out += " " + v.name + " free\n";
    } else if (v.lb == v.ub) {
      out += " " + v.name + " = " + num(v.lb) + "\n";
    } else {
      out += " " + (lb_inf ? std::string("-inf") : num(v.lb)) + " <= " +
             v.name + " <= " + (ub_inf ? std::string("+inf") : num(v.ub)) +
             "\n";
    }
  }
  bool any_bin = false;
  for (const auto& v : m.variables)
    if (v.type == VarType::Binary) { any_bin = true; break; }
  if (any_bin) {
    out += "Binaries\n";
    for (const auto& v : m.variables)
      if (v.type == VarType::Binary) out += " " + v.name + "\n";
  }
  out += "End\n";
  return out;
}

std::string emit_mps(const ModelIR& m, bool allow_indicators) {
  if (!m.indicators.empty() && !allow_indicators)
    throw build_error(
        "model has indicator constraints but MPS output cannot express "
        "them");
  if (!m.indicators.empty())
    throw build_error("indicator constraints are not representable in MPS");
  std::string out;
  out += "NAME " + m.name + "\n";
  out += "ROWS\n N obj\n";
  for (const auto& c : m.constraints) {
    char s = c.sense == ConSense::LE ? 'L' : (c.sense == ConSense::GE ? 'G' : 'E');
    out += std::string(" ") + s + " " + c.name + "\n";
  }
  // Column-major entries.
  std::vector<std::vector<std::pair<std::string, double>>> cols(
      m.variables.size());
  for (const auto& t : merged_terms(m.objective))
    cols[t.var].push_back({"obj", t.coef});
  for (const auto& c : m.constraints)
    for (const auto& t : merged_terms(c.terms))
      cols[t.var].push_back({c.name, t.coef});
  out += "COLUMNS\n";
  bool in_int = false;
  for (std::size_t v = 0; v < m.variables.size(); ++v) {
    bool is_int = m.variables[v].type == VarType::Binary;
    if (is_int != in_int) {
      out += is_int ? " MARKER M1 'MARKER' 'INTORG'\n"
                    : " MARKER M2 'MARKER' 'INTEND'\n";
      in_int = is_int;
    }
    for (const auto& [row, coef] : cols[v])
      out += " " + m.variables[v].name + " " + row + " " + num(coef) + "\n";
  }
  if (in_int) out += " MARKER M2 'MARKER' 'INTEND'\n";
  out += "RHS\n";
  for (const auto& c : m.constraints)
    if (c.rhs != 0.0) out += " rhs " + c.name + " " + num(c.rhs) + "\n";
  if (m.objective_offset != 0.0)
    out += " rhs obj " + num(-m.objective_offset) + "\n";
  out += "BOUNDS\n";
  for (const auto& v : m.variables) {
    if (v.type == VarType::Binary) {
      out += " BV bnd " + v.name + "\n";
      continue;
    }
    bool lb_inf = std::isinf(v.lb), ub_inf = std::isinf(v.ub);
    if (lb_inf && ub_inf) {
      out += " FR bnd " + v.name + "\n";
    } else if (v.lb == v.ub) {
      out += " FX bnd " + v.name + " " + num(v.lb) + "\n";
    } else {
      if (lb_inf) out += " MI bnd " + v.name + "\n";
      else out += " LO bnd " + v.name + " " + num(v.lb) + "\n";
      if (!ub_inf) out += " UP bnd " + v.name + " " + num(v.ub) + "\n";
    }
  }
  out += "ENDATA\n";
  return out;
}

}  // namespace

std::string model_to_string(const ModelIR& m, ModelFormat format,
                            bool allow_indicators) {
  return format == ModelFormat::LP ? emit_lp(m, allow_indicators)
                                   : emit_mps(m, allow_indicators);
}

void write_model(const ModelIR& m, ModelFormat format, const std::string& path,
                 bool allow_indicators) {
  std::ofstream f(path);
  if (!f) throw solver_error("cannot open '" + path + "' for writing");
  f << model_to_string(m, format, allow_indicators);
  if (!f.good()) throw solver_error("failed writing '" + path + "'");
}

namespace {

struct Token {
  std::string text;
};

std::vector<std::string> tokenize_lp(std::istream& in) {
  std::vector<std::string> toks;
  std::string line;
  while (std::getline(in, line)) {
    auto slash = line.find('\\');
    if (slash != std::string::npos) line.erase(slash);
    std::istringstream ls(line);
    std::string t;
    while (ls >> t) toks.push_back(t);
  }
  return toks;
}

bool is_number_token(const std::string& t) {
  if (t.empty()) return false;
  char c = t[0];
  return std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
         ((c == '+' || c == '-') && t.size() > 1 &&
          (std::isdigit(static_cast<unsigned char>(t[1])) || t[1] == '.' ||
           t[1] == 'i'));
}

}  // namespace

ModelIR read_model_lp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw parse_error("cannot open '" + path + "'");
  ModelIR m;
  m.name = fs::path(path).stem().string();
  std::string first;
  if (std::getline(f, first)) {
    const std::string tag = "\\Problem: ";
    if (first.rfind(tag, 0) == 0) m.name = first.substr(tag.size());
    else { f.clear(); f.seekg(0); }
  }
  auto toks = tokenize_lp(f);

  auto get_var = [&](const std::string& name) {
    auto it = m.catalog.find(name);
    if (it != m.catalog.end()) return it->second;
    int index = static_cast<int>(m.variables.size());
    m.variables.push_back({name, 0.0,
                           std::numeric_limits<double>::infinity(),
                           VarType::Continuous});
    m.catalog[name] = index;
    return index;
  };
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  auto parse_num = [&](const std::string& t) -> double {
    std::string s = lower(t);
    if (s == "-inf" || s == "-infinity")
      return -std::numeric_limits<double>::infinity();
    if (s == "+inf" || s == "inf" || s == "+infinity" || s == "infinity")
      return std::numeric_limits<double>::infinity();
    try {
      return std::stod(t);
    } catch (...) {
      throw parse_error("bad number '" + t + "' in " + path);
    }
  };

  enum Section { None, Objective, Rows, Bounds, Binaries, Done };
  Section sec = None;
  std::size_t i = 0;
  // Parses "name:"-prefixed linear expressions up to a sense token.
  auto parse_expr = [&](std::vector<LinTerm>& terms, std::string& stop) {
    double sign = 1.0;
    bool have_coef = false;
    double coef = 1.0;
    while (i < toks.size()) {
      const std::string& t = toks[i];
      std::string lt = lower(t);
      if (t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">" ||
          lt == "subject" || lt == "st" || lt == "s.t." || lt == "bounds" ||
          lt == "binaries" || lt == "binary" || lt == "bin" || lt == "end" ||
          lt == "general" || lt == "generals") {
        stop = t;
        return;
      }
      ++i;
      if (t == "+") { sign = 1.0; continue; }
      if (t == "-") { sign = -1.0; continue; }
      if (is_number_token(t)) {
        coef = parse_num(t);
        have_coef = true;
        continue;
      }
      terms.push_back({get_var(t), sign * (have_coef ? coef : 1.0)});
      sign = 1.0;
      coef = 1.0;
      have_coef = false;
    }
    stop.clear();
  };

  while (i < toks.size()) {
    std::string lt = lower(toks[i]);
    if (lt == "minimize" || lt == "min" || lt == "minimise") {
      sec = Objective;
      ++i;
      continue;
    }
    if (lt == "subject") { i += 2; sec = Rows; continue; }
    if (lt == "st" || lt == "s.t.") { ++i; sec = Rows; continue; }
    if (lt == "bounds") { ++i; sec = Bounds; continue; }
    if (lt == "binaries" || lt == "binary" || lt == "bin") {
      ++i;
      sec = Binaries;
      continue;
    }
    if (lt == "end") break;

    if (sec == Objective) {
      if (!toks[i].empty() && toks[i].back() == ':') ++i;  // label
      std::string stop;
      parse_expr(m.objective, stop);
      continue;
    }
    if (sec == Rows) {
      std::string name = toks[i];
      if (name.back() == ':') name.pop_back();
      else throw parse_error("expected 'name:' starting a row, got '" + name + "'");
      ++i;
      Constraint c;
      c.name = name;
      std::string stop;
      parse_expr(c.terms, stop);
      if (stop == "->")
        throw parse_error("indicator rows are not supported by the reader");
      if (stop != "<=" && stop != ">=" && stop != "=" )
        throw parse_error("row '" + name + "' has no sense");
      c.sense = stop == "<=" ? ConSense::LE
                             : (stop == ">=" ? ConSense::GE : ConSense::EQ);
      ++i;
      c.rhs = parse_num(toks[i++]);
      m.constraints.push_back(std::move(c));
      continue;
    }
    if (sec == Bounds) {
      // Forms: "lb <= x <= ub", "x free", "x = v".
      if (i + 1 < toks.size() && lower(toks[i + 1]) == "free") {
        int v = get_var(toks[i]);
        m.variables[v].lb = -std::numeric_limits<double>::infinity();
        i += 2;
        continue;
      }
      if (i + 2 < toks.size() && toks[i + 1] == "=") {
        int v = get_var(toks[i]);
        m.variables[v].lb = m.variables[v].ub = parse_num(toks[i + 2]);
        i += 3;
        continue;
      }
      if (i + 4 < toks.size() && toks[i + 1] == "<=" && toks[i + 3] == "<=") {
        int v = get_var(toks[i + 2]);
        m.variables[v].lb = parse_num(toks[i]);
        m.variables[v].ub = parse_num(toks[i + 4]);
        i += 5;
        continue;
      }
      throw parse_error("unsupported bound form near '" + toks[i] + "'");
    }
    if (sec == Binaries) {
      int v = get_var(toks[i]);
      m.variables[v].type = VarType::Binary;
      m.variables[v].lb = 0.0;
      m.variables[v].ub = 1.0;
      ++i;
      continue;
    }
    throw parse_error("unexpected token '" + toks[i] + "' in " + path);
  }
  return m;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::FeasibleTimeLimit: return "feasible-time-limit";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    default: return "error";
  }
}

std::vector<std::string> known_backends() {
  return {"highs-js", "highs", "cbc", "gurobi"};
}

BackendCapabilities backend_capabilities(const std::string& backend) {
  BackendCapabilities c;
  c.id = backend;
  if (backend == "highs-js") {
    c.supports_indicators = false;
    c.flag_map = {{"time_limit", "--time-limit"},
                  {"mip_gap", "--mip-gap"},
                  {"feasibility_tol", "--feas-tol"},
                  {"integrality_tol", "--int-tol"},
                  {"threads", "--threads"}};
  } else if (backend == "highs") {
    c.supports_indicators = false;
    c.flag_map = {{"time_limit", "--options time_limit"},
                  {"mip_gap", "--options mip_rel_gap"},
                  {"solution", "--solution_file"}};
  } else if (backend == "cbc") {
    c.supports_indicators = false;
    c.flag_map = {{"time_limit", "sec"},
                  {"mip_gap", "ratio"},
                  {"threads", "threads"}};
  } else if (backend == "gurobi") {
    c.supports_indicators = true;
    c.flag_map = {{"time_limit", "TimeLimit"},
                  {"mip_gap", "MIPGap"},
                  {"feasibility_tol", "FeasibilityTol"},
                  {"integrality_tol", "IntFeasTol"},
                  {"threads", "Threads"},
                  {"solution", "ResultFile"}};
  } else {
    throw validation_error("unknown solver backend '" + backend + "'");
  }
  return c;
}

namespace {

std::string default_executable(const std::string& backend) {
  if (backend == "highs-js") return "node";
  if (backend == "highs") return "highs";
  if (backend == "cbc") return "cbc";
  if (backend == "gurobi") return "gurobi_cl";
  return backend;
}

bool is_executable_file(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

std::string path_lookup(const std::string& name) {
  if (name.find('/') != std::string::npos)
    return is_executable_file(name) ? name : "";
  const char* penv = std::getenv("PATH");
  if (!penv) return "";
  std::istringstream ps(penv);
  std::string dir;
  while (std::getline(ps, dir, ':')) {
    if (dir.empty()) continue;
    fs::path cand = fs::path(dir) / name;
    if (is_executable_file(cand)) return cand.string();
  }
  return "";
}

std::string env_var_for(const std::string& backend) {
  std::string v = "CPWLFIT_";
  for (char c : backend)
    v += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return v;
}

fs::path self_exe_dir() {
  std::error_code ec;
  fs::path p = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return {};
  return p.parent_path();
}

std::string find_runner_script() {
  if (const char* env = std::getenv("CPWLFIT_HIGHS_RUNNER"))
    if (fs::exists(env)) return env;
  std::vector<fs::path> candidates;
  fs::path exe_dir = self_exe_dir();
  if (!exe_dir.empty()) {
    candidates.push_back(exe_dir / "highs_runner.mjs");
    candidates.push_back(exe_dir / ".." / "highs_runner.mjs");
    candidates.push_back(exe_dir / ".." / "tools" / "highs_runner.mjs");
    candidates.push_back(exe_dir / ".." / ".." / "tools" / "highs_runner.mjs");
  }
  candidates.push_back("highs_runner.mjs");
  candidates.push_back("tools/highs_runner.mjs");
  for (const auto& c : candidates) {
    std::error_code ec;
    if (fs::is_regular_file(c, ec)) return fs::weakly_canonical(c).string();
  }
  throw solver_error(
      "cannot locate highs_runner.mjs (set CPWLFIT_HIGHS_RUNNER)");
}

struct RunResult {
  int exit_code = -1;
  bool timed_out = false;
  double wall_time_sec = 0.0;
};

RunResult run_subprocess(const std::vector<std::string>& argv,
                         const std::string& log_path, double timeout_sec,
                         double grace_sec) {
  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw solver_error("fork failed: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    FILE* log = std::fopen(log_path.c_str(), "w");
    if (log) {
      ::dup2(::fileno(log), STDOUT_FILENO);
      ::dup2(::fileno(log), STDERR_FILENO);
    }
    ::execvp(cargv[0], cargv.data());
    std::perror("execvp");
    ::_exit(127);
  }

  RunResult r;
  bool term_sent = false, kill_sent = false;
  while (true) {
    int status = 0;
    pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) {
      r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
      break;
    }
    if (w < 0) throw solver_error("waitpid failed");
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!term_sent && elapsed > timeout_sec) {
      ::kill(pid, SIGTERM);
      term_sent = true;
      r.timed_out = true;
    }
    if (!kill_sent && elapsed > timeout_sec + grace_sec) {
      ::kill(pid, SIGKILL);
      kill_sent = true;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  r.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return r;
}

SolveStatus status_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (t == "optimal") return SolveStatus::Optimal;
  if (t.find("infeasible") != std::string::npos) return SolveStatus::Infeasible;
  if (t.find("unbounded") != std::string::npos) return SolveStatus::Unbounded;
  if (t.find("time limit") != std::string::npos)
    return SolveStatus::FeasibleTimeLimit;
  return SolveStatus::Error;
}

SolveOutcome parse_runner_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw solver_error("solver wrote no solution file (" + path + ")");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw solver_error("bad solution file: " + std::string(e.what()));
  }
  SolveOutcome o;
  o.status = status_from_string(j.value("status", "Error"));
  o.message = j.value("message", "");
  if (j.contains("objective") && j["objective"].is_number())
    o.objective = j["objective"].get<double>();
  o.bound = o.objective;
  o.gap = 0.0;
  if (j.contains("columns"))
    for (auto it = j["columns"].begin(); it != j["columns"].end(); ++it)
      if (it.value().is_number())
        o.values[it.key()] = it.value().get<double>();
  if (o.status == SolveStatus::FeasibleTimeLimit && o.values.empty())
    o.status = SolveStatus::Error;
  return o;
}

// HiGHS / CBC text solution files: best-effort readers.
SolveOutcome parse_text_solution(const std::string& path,
                                 const std::string& backend) {
  std::ifstream f(path);
  if (!f) throw solver_error("solver wrote no solution file (" + path + ")");
  SolveOutcome o;
  std::string line;
  bool in_columns = false;
  while (std::getline(f, line)) {
    std::istringstream ls(line);
    if (backend == "highs") {
      if (line.rfind("Model status:", 0) == 0) {
        o.status = status_from_string(line.substr(13));
        continue;
      }
      if (line.rfind("Objective", 0) == 0) {
        std::string w;
        ls >> w;
        ls >> o.objective;
        o.bound = o.objective;
        continue;
      }
      if (line == "# Columns" || line.rfind("# Columns", 0) == 0) {
        in_columns = true;
        continue;
      }
      if (line.rfind("# Rows", 0) == 0) {
        in_columns = false;
        continue;
      }
      if (in_columns) {
        std::string name;
        double v;
        if (ls >> name >> v) o.values[name] = v;
      }
    } else {  // cbc
      if (line.find("Optimal") != std::string::npos &&
          line.find("objective") != std::string::npos) {
        o.status = SolveStatus::Optimal;
        auto pos = line.find("value");
        if (pos != std::string::npos)
          o.objective = std::stod(line.substr(pos + 5));
        o.bound = o.objective;
        continue;
      }
      if (line.find("Infeasible") != std::string::npos) {
        o.status = SolveStatus::Infeasible;
        continue;
      }
      int index;
      std::string name;
      double v;
      if (ls >> index >> name >> v) o.values[name] = v;
    }
  }
  return o;
}

}  // namespace

std::string discover_executable(const SolverSpec& spec) {
  if (!spec.executable.empty()) {
    std::string p = path_lookup(spec.executable);
    if (p.empty())
      throw solver_error("solver executable '" + spec.executable +
                         "' not found or not executable");
    return p;
  }
  if (const char* env = std::getenv(env_var_for(spec.backend).c_str())) {
    std::string p = path_lookup(env);
    if (p.empty())
      throw solver_error(env_var_for(spec.backend) + " points to '" +
                         std::string(env) + "' which is not executable");
    return p;
  }
  std::string name = default_executable(spec.backend);
  std::string p = path_lookup(name);
  if (p.empty())
    throw solver_error("no '" + name + "' executable on PATH for backend '" +
                       spec.backend + "'");
  return p;
}

SolveOutcome solve(const ModelIR& m, const SolverSpec& spec) {
  BackendCapabilities caps = backend_capabilities(spec.backend);
  if (!m.indicators.empty() && !caps.supports_indicators)
    throw solver_error("backend '" + spec.backend +
                       "' cannot solve models with indicator constraints; "
                       "rebuild with a big-M mode or pick another backend");
  std::string exe = discover_executable(spec);

  bool own_dir = spec.work_dir.empty();
  fs::path dir;
  if (own_dir) {
    std::string tmpl = (fs::temp_directory_path() / "cpwlfit.XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!::mkdtemp(buf.data()))
      throw solver_error("mkdtemp failed: " + std::string(std::strerror(errno)));
    dir = buf.data();
  } else {
    dir = spec.work_dir;
    fs::create_directories(dir);
  }
  fs::path model_path = dir / "model.lp";
  fs::path sol_path = dir / "solution.out";
  fs::path log_path = dir / "solver.log";

  write_model(m, ModelFormat::LP, model_path.string(),
              caps.supports_indicators);

  std::vector<std::string> argv;
  if (spec.backend == "highs-js") {
    argv = {exe, find_runner_script(), model_path.string(), sol_path.string(),
            "--time-limit", num(spec.time_limit_sec),
            "--mip-gap", num(spec.mip_gap),
            "--feas-tol", num(spec.feasibility_tol),
            "--int-tol", num(spec.integrality_tol),
            "--threads", std::to_string(spec.threads)};
  } else if (spec.backend == "highs") {
    argv = {exe, model_path.string(),
            "--solution_file", sol_path.string(),
            "--time_limit", num(spec.time_limit_sec)};
  } else if (spec.backend == "cbc") {
    argv = {exe, model_path.string(),
            "sec", num(spec.time_limit_sec),
            "ratio", num(spec.mip_gap),
            "solve", "solu", sol_path.string()};
  } else {  // gurobi
    argv = {exe,
            "TimeLimit=" + num(spec.time_limit_sec),
            "MIPGap=" + num(spec.mip_gap),
            "FeasibilityTol=" + num(spec.feasibility_tol),
            "IntFeasTol=" + num(spec.integrality_tol),
            "Threads=" + std::to_string(spec.threads),
            "ResultFile=" + sol_path.string(),
            model_path.string()};
  }

  RunResult run =
      run_subprocess(argv, log_path.string(), spec.time_limit_sec + 60.0, 30.0);

  SolveOutcome out;
  try {
    out = spec.backend == "highs-js"
              ? parse_runner_json(sol_path.string())
              : parse_text_solution(sol_path.string(), spec.backend);
  } catch (const Error&) {
    if (!spec.keep_files && own_dir) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
    throw;
  }
  out.wall_time_sec = run.wall_time_sec;
  out.log_path = log_path.string();
  if (run.timed_out && out.status == SolveStatus::Optimal)
    out.status = SolveStatus::FeasibleTimeLimit;
  if (out.status == SolveStatus::Error && out.message.empty()) {
    out.message = "solver exited with code " + std::to_string(run.exit_code) +
                  "; see " + log_path.string();
  }
  if (!spec.keep_files && own_dir &&
      out.status != SolveStatus::Error) {
    std::error_code ec;
    fs::remove_all(dir, ec);
    out.log_path.clear();
  }
  return out;
}

}  // namespace cpwlfit
