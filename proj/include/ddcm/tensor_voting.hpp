#pragma once

#include "ddcm/constitutive_law.hpp"
#include "ddcm/material_data.hpp"
#include "ddcm/tangent_frame.hpp"

#include <optional>
#include <vector>

namespace ddcm {

struct VotingConfig {
  /// Vote decay length in learning-space units.
  double sigma = 0.25;
  std::size_t k_neighbors = 64;
  /// Tangent-space dimension; estimated from the eigenvalue gap when empty.
  std::optional<int> manifold_dim;
  /// Worker threads for vote_dataset; frames do not depend on this.
  unsigned threads = 1;
};

struct VotingStats {
  std::size_t skipped_duplicates = 0;
  std::size_t degenerate_frames = 0;
  std::size_t rescaled_points = 0;  // all vote weights underflowed
};

/// exp(-s^2/sigma^2) (I - v v^T / |v|^2) with v = receiver - voter.
Eigen::MatrixXd ball_vote(const Eigen::VectorXd& receiver, const Eigen::VectorXd& voter,
                          double sigma);

/// Sum of ball votes cast on point i by its K nearest neighbors in learning
/// space. Voters coincident with the receiver are skipped and counted.
Eigen::MatrixXd accumulate_votes(const MaterialDataSet& ds, std::size_t i,
                                 const VotingConfig& cfg, VotingStats* stats = nullptr);

/// Spectral decomposition of an accumulated tensor into a tangent frame.
TangentFrame analyze_tensor(const Eigen::MatrixXd& r, const VotingConfig& cfg);

MaterialDataSet vote_dataset(const MaterialDataSet& ds, const VotingConfig& cfg,
                             VotingStats* stats = nullptr);

/// Mean angle in degrees between each point's tangent space and its reference
/// tangent (learning space). Orientation is ignored.
double angular_error(const MaterialDataSet& ds, const std::vector<Eigen::VectorXd>& reference_tangents);

/// Learning-space tangent of a one-dimensional law's graph at the point of
/// the graph closest to each data point. The closest point is found by dense
/// sampling of strains in [-strain_bound, strain_bound].
std::vector<Eigen::VectorXd> reference_tangents(const MaterialDataSet& ds, const ConstitutiveLaw& law,
                                                double strain_bound, std::size_t samples = 100000);

}  // namespace ddcm
