#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sttopo {

// Coarse classification used by the CLI to map failures onto exit codes.
enum class ErrorCategory { Config, Dimension, Hierarchy, Solver, Io };

std::string_view to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorCategory::Dimension, what) {}
};

class HierarchyError : public Error {
 public:
  explicit HierarchyError(const std::string& what)
      : Error(ErrorCategory::Hierarchy, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what)
      : Error(ErrorCategory::Solver, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::Config, what) {}
};

}  // namespace sttopo
