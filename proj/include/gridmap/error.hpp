#pragma once

#include <stdexcept>
#include <string>

namespace gridmap {

/// Failure category. Each maps to one CLI exit code.
enum class ErrorKind {
  input,       // malformed or unsupported input data / config
  numerical,   // solver failure, non-finite values
  infeasible,  // grid fitting could not produce M cells
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& message)
      : std::runtime_error(message), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(ErrorKind::input, "load", m) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& m, std::string stage = "validate")
      : Error(ErrorKind::input, std::move(stage), m) {}
};

/// Holes, islands, pinched rings and other layouts the pipeline cannot model.
struct TopologyError : Error {
  explicit TopologyError(const std::string& m) : Error(ErrorKind::input, "topology", m) {}
};

struct DegenerateGeometryError : Error {
  explicit DegenerateGeometryError(const std::string& m)
      : Error(ErrorKind::input, "geometry", m) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& m) : Error(ErrorKind::numerical, "snake", m) {}
};

struct InfeasibleGridError : Error {
  explicit InfeasibleGridError(const std::string& m)
      : Error(ErrorKind::infeasible, "gridfit", m) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return 2;
    case ErrorKind::numerical: return 3;
    case ErrorKind::infeasible: return 4;
  }
  return 1;
}

}  // namespace gridmap
