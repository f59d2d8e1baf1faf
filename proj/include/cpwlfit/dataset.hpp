// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CPWLFIT_DATASET_HPP
#define CPWLFIT_DATASET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cpwlfit {

/// A set of N points (x_i in R^d, z_i in R).
struct DataSet {
  int dim = 0;
  std::string name;
  std::vector<std::vector<double>> x;  // N rows of length dim
  std::vector<double> z;               // N values

  int size() const { return static_cast<int>(z.size()); }

  /// Throws if row lengths mismatch or two points share identical x.
  void validate() const;

  std::string to_json() const;
  static DataSet from_json(const std::string& text);
};

/// Per-dimension affine maps taking raw coordinates onto [0,1].
/// Index 0..d-1 scale x, index d scales z.
struct ScalingInfo {
  std::vector<double> offset;  // d+1 entries
  std::vector<double> scale;   // d+1 entries, strictly positive
  std::vector<bool> constant;  // dimensions left unscaled (flagged)

  double to_scaled(int dim_index, double v) const {
    return (v - offset[dim_index]) / scale[dim_index];
  }
  double to_raw(int dim_index, double v) const {
    return v * scale[dim_index] + offset[dim_index];
  }
};

enum class SyntheticFunction {
  X2SinX1,      // z = x2*sin(x1), d=2
  X1SqMinusX2Sq,  // z = x1^2 - x2^2, d=2
  SumOfSquares3,  // z = x1^2 + x2^2 + x3^2, d=3
  ProductXYZ,     // z = x1*x2*x3, d=3
};

enum class SamplingMode { Grid, UniformRandom };

struct SyntheticSpec {
  SyntheticFunction function = SyntheticFunction::X1SqMinusX2Sq;
  std::vector<double> box_lo;  // length = arity of function
  std::vector<double> box_hi;
  int count = 64;
  std::uint64_t seed = 0;
  SamplingMode mode = SamplingMode::UniformRandom;
};

int synthetic_arity(SyntheticFunction f);
double synthetic_value(SyntheticFunction f, const std::vector<double>& x);
SyntheticFunction synthetic_function_from_name(const std::string& name);
std::string synthetic_function_name(SyntheticFunction f);

/// Parses a CSV file with header `x1,...,xd,z`. Row order preserved.
DataSet load_csv(const std::string& path);

/// Writes the same CSV layout that load_csv reads.
void save_csv(const DataSet& ds, const std::string& path);

/// Samples the named function. Deterministic for a fixed seed.
DataSet generate(const SyntheticSpec& spec);

/// Min-max map of every coordinate and z onto [0,1]. Constant
/// dimensions are left unscaled (scale 1, offset to 0) and flagged.
std::pair<DataSet, ScalingInfo> rescale(const DataSet& ds);

/// Inverse of rescale applied to a scaled copy.
DataSet unscale(const DataSet& ds, const ScalingInfo& info);

struct GeneralPositionReport {
  bool pass = false;
  bool exhaustive = true;
  std::uint64_t subsets_checked = 0;
  std::uint64_t subsets_total = 0;
  std::vector<int> offending_subset;  // empty when pass
  double min_relative_det = 0.0;      // over checked subsets
};

/// Checks |det M_s| > tol * (inf-norm of M_s)^d over (d+1)-subsets,
/// exhaustively up to `subset_cap` subsets, then by random sampling.
GeneralPositionReport check_general_position(const DataSet& ds,
                                             double tol = 1e-9,
                                             std::uint64_t subset_cap = 2000000);

}  // namespace cpwlfit

#endif  // CPWLFIT_DATASET_HPP
