#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lvgm/family.hpp"

namespace lvgm {

/// d x n observation matrix; columns are samples, rows are variables.
struct DataMatrix {
  Matrix X;
  std::vector<std::string> names;

  DataMatrix() = default;
  explicit DataMatrix(Matrix x) : X(std::move(x)) { default_names(); }
  DataMatrix(Matrix x, std::vector<std::string> n) : X(std::move(x)), names(std::move(n)) {}

  Eigen::Index dim() const { return X.rows(); }
  Eigen::Index samples() const { return X.cols(); }

  void default_names() {
    names.resize(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) names[static_cast<std::size_t>(i)] = "v" + std::to_string(i + 1);
  }

  /// Per-variable means (row means of X).
  Vector variable_means() const { return X.rowwise().mean(); }

  /// Subtracts the given per-variable means from every sample.
  void center(const Vector& means) { X.colwise() -= means; }

  /// First (row, col) violating the family domain, or (-1, -1).  Coordinates
  /// are in the internal layout: row = variable, col = sample.
  std::pair<Eigen::Index, Eigen::Index> first_domain_violation(const FamilySpec& family) const {
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (!family.value_in_domain(X(i, k))) return {i, k};
      }
    }
    return {-1, -1};
  }
};

}  // namespace lvgm
