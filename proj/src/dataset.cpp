// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#include "cpwlfit/dataset.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cpwlfit/error.hpp"

namespace cpwlfit {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim whitespace and CR
    auto begin = cell.find_first_not_of(" \t\r");
    auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos
                        ? std::string()
                        : cell.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_double(const std::string& text, int line_no, const std::string& col) {
  try {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw parse_error("line " + std::to_string(line_no) + ": cell '" + text +
                      "' in column " + col + " is not numeric");
  }
}

}  // namespace

void DataSet::validate() const {
  if (dim <= 0) throw validation_error("dataset dimension must be positive");
  if (x.size() != z.size())
    throw validation_error("coordinate and value counts differ");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (static_cast<int>(x[i].size()) != dim)
      throw validation_error("point " + std::to_string(i) +
                             " has wrong dimension");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (x[i] == x[j])
        throw validation_error("points " + std::to_string(i) + " and " +
                               std::to_string(j) +
                               " share identical x coordinates");
    }
  }
}

std::string DataSet::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["name"] = name;
  auto points = nlohmann::json::array();
  for (int i = 0; i < size(); ++i) {
    nlohmann::json p;
    p["x"] = x[i];
    p["z"] = z[i];
    points.push_back(p);
  }
  j["points"] = points;
  return j.dump(2);
}

DataSet DataSet::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  DataSet ds;
  ds.dim = j.at("dim").get<int>();
  ds.name = j.value("name", "");
  for (const auto& p : j.at("points")) {
    ds.x.push_back(p.at("x").get<std::vector<double>>());
    ds.z.push_back(p.at("z").get<double>());
  }
  ds.validate();
  return ds;
}

int synthetic_arity(SyntheticFunction f) {
  switch (f) {
    case SyntheticFunction::X2SinX1:
    case SyntheticFunction::X1SqMinusX2Sq:
      return 2;
    case SyntheticFunction::SumOfSquares3:
    case SyntheticFunction::ProductXYZ:
      return 3;
  }
  throw validation_error("unknown synthetic function");
}

double synthetic_value(SyntheticFunction f, const std::vector<double>& x) {
  switch (f) {
    case SyntheticFunction::X2SinX1:
      return x[1] * std::sin(x[0]);
    case SyntheticFunction::X1SqMinusX2Sq:
      return x[0] * x[0] - x[1] * x[1];
    case SyntheticFunction::SumOfSquares3:
      return x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    case SyntheticFunction::ProductXYZ:
      return x[0] * x[1] * x[2];
  }
  throw validation_error("unknown synthetic function");
}

SyntheticFunction synthetic_function_from_name(const std::string& name) {
  if (name == "x2sinx1") return SyntheticFunction::X2SinX1;
  if (name == "x1sq-x2sq") return SyntheticFunction::X1SqMinusX2Sq;
  if (name == "sumsq3") return SyntheticFunction::SumOfSquares3;
  if (name == "xyz") return SyntheticFunction::ProductXYZ;
  throw validation_error("unknown synthetic function '" + name +
                         "' (expected x2sinx1, x1sq-x2sq, sumsq3, xyz)");
}

std::string synthetic_function_name(SyntheticFunction f) {
  switch (f) {
    case SyntheticFunction::X2SinX1: return "x2sinx1";
    case SyntheticFunction::X1SqMinusX2Sq: return "x1sq-x2sq";
    case SyntheticFunction::SumOfSquares3: return "sumsq3";
    case SyntheticFunction::ProductXYZ: return "xyz";
  }
  return "?";
}

DataSet load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw parse_error("empty file '" + path + "'");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header.back() != "z")
    throw parse_error("header must be x1,...,xd,z (got '" + line + "')");
  int dim = static_cast<int>(header.size()) - 1;
  for (int r = 0; r < dim; ++r) {
    if (header[r] != "x" + std::to_string(r + 1))
      throw parse_error("header column " + std::to_string(r + 1) +
                        " must be x" + std::to_string(r + 1));
  }
  DataSet ds;
  ds.dim = dim;
  ds.name = path;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw parse_error("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " cells, got " +
                        std::to_string(cells.size()));
    std::vector<double> xi(dim);
    for (int r = 0; r < dim; ++r)
      xi[r] = parse_double(cells[r], line_no, header[r]);
    double zi = parse_double(cells[dim], line_no, "z");
    ds.x.push_back(std::move(xi));
    ds.z.push_back(zi);
  }
  ds.validate();
  return ds;
}

void save_csv(const DataSet& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot write '" + path + "'");
  for (int r = 0; r < ds.dim; ++r) out << "x" << (r + 1) << ",";
  out << "z\n";
  char buf[64];
  for (int i = 0; i < ds.size(); ++i) {
    for (int r = 0; r < ds.dim; ++r) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.x[i][r]);
      out << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", ds.z[i]);
    out << buf << "\n";
  }
}

DataSet generate(const SyntheticSpec& spec) {
  int d = synthetic_arity(spec.function);
  if (static_cast<int>(spec.box_lo.size()) != d ||
      static_cast<int>(spec.box_hi.size()) != d)
    throw validation_error("domain box arity does not match function arity");
  for (int r = 0; r < d; ++r)
    if (!(spec.box_lo[r] < spec.box_hi[r]))
      throw validation_error("empty domain box in dimension " +
                             std::to_string(r + 1));
  if (spec.count < 1) throw validation_error("point count must be positive");

  DataSet ds;
  ds.dim = d;
  ds.name = synthetic_function_name(spec.function);

  if (spec.mode == SamplingMode::Grid) {
    int per_dim = static_cast<int>(
        std::llround(std::pow(static_cast<double>(spec.count), 1.0 / d)));
    per_dim = std::max(per_dim, 2);
    std::vector<int> idx(d, 0);
    while (true) {
      std::vector<double> xi(d);
      for (int r = 0; r < d; ++r) {
        xi[r] = spec.box_lo[r] + (spec.box_hi[r] - spec.box_lo[r]) *
                                     static_cast<double>(idx[r]) /
                                     (per_dim - 1);
      }
      ds.z.push_back(synthetic_value(spec.function, xi));
      ds.x.push_back(std::move(xi));
      int r = d - 1;
      while (r >= 0 && ++idx[r] == per_dim) idx[r--] = 0;
      if (r < 0) break;
    }
  } else {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < spec.count; ++i) {
      std::vector<double> xi(d);
      for (int r = 0; r < d; ++r)
        xi[r] = spec.box_lo[r] + (spec.box_hi[r] - spec.box_lo[r]) * unit(rng);
      ds.z.push_back(synthetic_value(spec.function, xi));
      ds.x.push_back(std::move(xi));
    }
  }
  ds.validate();
  return ds;
}

std::pair<DataSet, ScalingInfo> rescale(const DataSet& ds) {
  if (ds.size() < 2) throw validation_error("rescale needs at least 2 points");
  int d = ds.dim;
  ScalingInfo info;
  info.offset.assign(d + 1, 0.0);
  info.scale.assign(d + 1, 1.0);
  info.constant.assign(d + 1, false);

  for (int r = 0; r <= d; ++r) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int i = 0; i < ds.size(); ++i) {
      double v = (r < d) ? ds.x[i][r] : ds.z[i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi > lo) {
      info.offset[r] = lo;
      info.scale[r] = hi - lo;
    } else {
      info.constant[r] = true;  // left unscaled, offset recentered to 0
      info.offset[r] = lo;
      info.scale[r] = 1.0;
    }
  }

  DataSet out = ds;
  for (int i = 0; i < ds.size(); ++i) {
    for (int r = 0; r < d; ++r) out.x[i][r] = info.to_scaled(r, ds.x[i][r]);
    out.z[i] = info.to_scaled(d, ds.z[i]);
  }
  return {std::move(out), std::move(info)};
}

DataSet unscale(const DataSet& ds, const ScalingInfo& info) {
  DataSet out = ds;
  for (int i = 0; i < ds.size(); ++i) {
    for (int r = 0; r < ds.dim; ++r) out.x[i][r] = info.to_raw(r, ds.x[i][r]);
    out.z[i] = info.to_raw(ds.dim, ds.z[i]);
  }
  return out;
}

namespace {

double lifted_det_ratio(const DataSet& ds, const std::vector<int>& subset) {
  int d = ds.dim;
  Eigen::MatrixXd m(d + 1, d + 1);
  for (int k = 0; k <= d; ++k) {
    for (int r = 0; r < d; ++r) m(k, r) = ds.x[subset[k]][r];
    m(k, d) = 1.0;
  }
  double inf_norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  if (inf_norm == 0.0) return 0.0;
  double det = m.determinant();
  return std::abs(det) / std::pow(inf_norm, d);
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    r = r * (n - i) / (i + 1);
    if (r > (std::uint64_t(1) << 62)) return r;  // saturate
  }
  return r;
}

}  // namespace

GeneralPositionReport check_general_position(const DataSet& ds, double tol,
                                             std::uint64_t subset_cap) {
  int n = ds.size();
  int d = ds.dim;
  if (n < d + 1) throw validation_error("need at least d+1 points");

  GeneralPositionReport rep;
  rep.subsets_total = binomial(n, d + 1);
  rep.min_relative_det = std::numeric_limits<double>::infinity();
  rep.pass = true;

  if (rep.subsets_total <= subset_cap) {
    std::vector<int> subset(d + 1);
    for (int k = 0; k <= d; ++k) subset[k] = k;
    while (true) {
      ++rep.subsets_checked;
      double ratio = lifted_det_ratio(ds, subset);
      rep.min_relative_det = std::min(rep.min_relative_det, ratio);
      if (ratio <= tol) {
        rep.pass = false;
        rep.offending_subset = subset;
        return rep;
      }
      int k = d;
      while (k >= 0 && subset[k] == n - (d + 1) + k) --k;
      if (k < 0) break;
      ++subset[k];
      for (int j = k + 1; j <= d; ++j) subset[j] = subset[j - 1] + 1;
    }
  } else {
    rep.exhaustive = false;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::vector<int> subset(d + 1);
    for (std::uint64_t t = 0; t < subset_cap; ++t) {
      // sample d+1 distinct indices
      for (int k = 0; k <= d;) {
        int cand = static_cast<int>(rng() % n);
        bool dup = false;
        for (int j = 0; j < k; ++j) dup |= (subset[j] == cand);
        if (!dup) subset[k++] = cand;
      }
      std::sort(subset.begin(), subset.end());
      ++rep.subsets_checked;
      double ratio = lifted_det_ratio(ds, subset);
      rep.min_relative_det = std::min(rep.min_relative_det, ratio);
      if (ratio <= tol) {
        rep.pass = false;
        rep.offending_subset = subset;
        return rep;
      }
    }
  }
  return rep;
}

}  // namespace cpwlfit
