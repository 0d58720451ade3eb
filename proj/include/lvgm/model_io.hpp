#pragma once

#include <cstdint>
#include <string>

#include "lvgm/data_matrix.hpp"
#include "lvgm/solver.hpp"
#include "lvgm/stability.hpp"
#include "lvgm/synthgen.hpp"

namespace lvgm {

/// CSV layout: one header row of variable names, then one row per sample
/// (the human convention; the in-memory DataMatrix is the transpose).
/// Reading rejects NaN/inf and non-numeric fields with their coordinates.
DataMatrix read_data_csv(const std::string& path);
void write_data_csv(const DataMatrix& data, const std::string& path);

/// Ground-truth bundle persisted next to generated data.
struct TruthBundle {
  TruthSpec spec;
  Matrix theta;
  Matrix B;
  std::uint64_t seed = 0;
};

void write_truth_json(const TruthBundle& truth, const std::string& path);
TruthBundle read_truth_json(const std::string& path);

struct LoadedModel {
  FitResult fit;
  FamilySpec family;
};

/// Model files store alpha densely, theta as sparse triplets, and L through
/// its (basis, coordinates) factorization; numbers survive the round trip
/// bit for bit.
void write_model_json(const FitResult& fit, const FamilySpec& family, const std::string& path);
LoadedModel read_model_json(const std::string& path);

void write_report_json(const StabilityReport& report, const std::string& path);
StabilityReport read_report_json(const std::string& path);

void write_structure_json(const SelectedStructure& structure, const std::string& path);
SelectedStructure read_structure_json(const std::string& path);

}  // namespace lvgm
