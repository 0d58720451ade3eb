#pragma once

#include <stdexcept>
#include <string>

namespace lvgm {

/// Cholesky factorization failed where a positive definite matrix was required.
class NotPositiveDefiniteError : public std::runtime_error {
 public:
  explicit NotPositiveDefiniteError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A fit was started from a point violating the family's feasible set.
class InfeasibleStartError : public std::runtime_error {
 public:
  explicit InfeasibleStartError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Sampling failed (infeasible truth, rate cap exceeded, rejection budget spent).
class SamplerError : public std::runtime_error {
 public:
  explicit SamplerError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad run configuration (unknown key, missing file, malformed value).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lvgm
