#pragma once

#include <stdexcept>
#include <string>

namespace graphon {

/// Invalid configuration, dimensions or parameters. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// The requested operation is not defined for the given noise family.
class UnsupportedError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Numerical breakdown (non-finite values, solver failure). Maps to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Axis { Rows, Columns };

inline const char* to_string(Axis axis) { return axis == Axis::Rows ? "row" : "column"; }

/// A cluster on `axis` has no members; callers are expected to repair and retry.
class EmptyClusterError : public std::runtime_error {
 public:
  EmptyClusterError(Axis axis, int cluster)
      : std::runtime_error(std::string("empty ") + to_string(axis) + " cluster " +
                           std::to_string(cluster)),
        axis_(axis),
        cluster_(cluster) {}

  Axis axis() const noexcept { return axis_; }
  int cluster() const noexcept { return cluster_; }

 private:
  Axis axis_;
  int cluster_;
};

}  // namespace graphon
