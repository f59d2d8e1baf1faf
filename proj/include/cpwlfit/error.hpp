// Copyright 2026 The cpwlfit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CPWLFIT_ERROR_HPP
#define CPWLFIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cpwlfit {

/// Error categories map onto CLI exit codes (validation=4, solver=3).
enum class ErrorKind {
  Validation,  // bad input data or arguments
  Parse,       // malformed file contents
  Build,       // unsatisfiable model-construction request
  Solver,      // backend process or solution-parsing failure
  Numerical,   // tolerance breach, singular system
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::Validation, what);
}
inline Error parse_error(const std::string& what) {
  return Error(ErrorKind::Parse, what);
}
inline Error build_error(const std::string& what) {
  return Error(ErrorKind::Build, what);
}
inline Error solver_error(const std::string& what) {
  return Error(ErrorKind::Solver, what);
}
inline Error numerical_error(const std::string& what) {
  return Error(ErrorKind::Numerical, what);
}

}  // namespace cpwlfit

#endif  // CPWLFIT_ERROR_HPP
