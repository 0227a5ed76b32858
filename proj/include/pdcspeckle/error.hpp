#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace pdcspeckle {

/// Broad failure class; the CLI maps each to an exit code.
enum class ErrorKind { Config, Io, Analysis };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid configuration value. `key()` names the offending config key when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : Error(ErrorKind::Config, key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

enum class AnalysisFailure {
  InvalidInput,
  DegenerateRegion,
  SubThermalVariance,
  FitFailure,
  FitRange,
  RankDeficient,
};

inline const char* to_string(AnalysisFailure f) {
  switch (f) {
    case AnalysisFailure::InvalidInput: return "invalid_input";
    case AnalysisFailure::DegenerateRegion: return "degenerate_region";
    case AnalysisFailure::SubThermalVariance: return "sub_thermal_variance";
    case AnalysisFailure::FitFailure: return "fit_failure";
    case AnalysisFailure::FitRange: return "fit_range";
    case AnalysisFailure::RankDeficient: return "rank_deficient";
  }
  return "unknown";
}

class AnalysisError : public Error {
 public:
  AnalysisError(AnalysisFailure failure, const std::string& what)
      : Error(ErrorKind::Analysis, std::string(to_string(failure)) + ": " + what), failure_(failure) {}
  AnalysisFailure failure() const noexcept { return failure_; }

 private:
  AnalysisFailure failure_;
};

}  // namespace pdcspeckle
