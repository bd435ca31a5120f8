#pragma once

#include "ddcm/dd_solver.hpp"

#include <filesystem>
#include <string>

namespace ddcm {

/// Solver output as stored on disk. Material-point weights are not stored;
/// they belong to the problem.
struct StoredResult {
  std::string scheme;
  bool converged = false;
  int iterations = 0;
  double data_distance = 0.0;
  Vector u;
  Vector eta;
  std::vector<LocalState> states;  // z per material point
  std::vector<double> distance_history;
  std::vector<double> beta_history;
};

StoredResult to_stored(const SolveResult& r, const std::string& scheme);
void save_result(const StoredResult& r, const std::filesystem::path& path);
StoredResult load_result(const std::filesystem::path& path);

}  // namespace ddcm
