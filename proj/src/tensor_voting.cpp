#include "ddcm/tensor_voting.hpp"

#include "ddcm/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace ddcm {

namespace {

bool is_symmetric(const Eigen::MatrixXd& r) {
  if (r.rows() != r.cols()) return false;
  const double scale = std::max(r.cwiseAbs().maxCoeff(), 1e-300);
  return (r - r.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// Votes with a common factor exp(-s0^2/sigma^2) removed; same eigenvectors.
Eigen::MatrixXd accumulate_shifted(const MaterialDataSet& ds, std::size_t i,
                                   const std::vector<std::size_t>& voters, double sigma) {
  const Eigen::VectorXd p = ds.learning_point(i);
  double s0 = HUGE_VAL;
  for (auto j : voters) {
    const double s2 = (p - ds.learning_point(j)).squaredNorm();
    if (s2 > 0.0) s0 = std::min(s0, s2);
  }
  const Eigen::Index n = p.size();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (auto j : voters) {
    const Eigen::VectorXd v = p - ds.learning_point(j);
    const double s2 = v.squaredNorm();
    if (s2 == 0.0) continue;
    const double w = std::exp(-(s2 - s0) / (sigma * sigma));
    r += w * (Eigen::MatrixXd::Identity(n, n) - v * v.transpose() / s2);
  }
  return r;
}

}  // namespace

Eigen::MatrixXd ball_vote(const Eigen::VectorXd& receiver, const Eigen::VectorXd& voter, double sigma) {
  if (receiver.size() != voter.size()) throw DimensionError("receiver and voter sizes differ");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  const Eigen::VectorXd v = receiver - voter;
  const double s2 = v.squaredNorm();
  if (s2 == 0.0) throw DegenerateVoteError("ball vote between coincident points");
  const double w = std::exp(-s2 / (sigma * sigma));
  const Eigen::Index n = v.size();
  return w * (Eigen::MatrixXd::Identity(n, n) - v * v.transpose() / s2);
}

Eigen::MatrixXd accumulate_votes(const MaterialDataSet& ds, std::size_t i, const VotingConfig& cfg,
                                 VotingStats* stats) {
  if (cfg.k_neighbors == 0) throw InvalidArgument("k_neighbors must be >= 1");
  if (ds.size() < cfg.k_neighbors + 1)
    throw InvalidArgument("data set needs at least k_neighbors + 1 points for voting");
  const auto voters = k_nearest_neighbors(ds, i, cfg.k_neighbors);
  const Eigen::VectorXd p = ds.learning_point(i);
  const Eigen::Index n = p.size();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (auto j : voters) {
    if ((p - ds.learning_point(j)).squaredNorm() == 0.0) {
      if (stats) ++stats->skipped_duplicates;
      continue;
    }
    r += ball_vote(p, ds.learning_point(j), cfg.sigma);
  }
  return r;
}

TangentFrame analyze_tensor(const Eigen::MatrixXd& r, const VotingConfig& cfg) {
  if (!is_symmetric(r)) throw InvalidArgument("vote tensor is not symmetric");
  const Eigen::Index n = r.rows();
  if (n < 2) throw DimensionError("vote tensor must be at least 2x2");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (r + r.transpose()));
  // ascending -> descending
  TangentFrame frame;
  frame.eigenvalues = eig.eigenvalues().reverse();
  frame.basis = eig.eigenvectors().rowwise().reverse();

  const double top = frame.eigenvalues(0);
  const double bottom = frame.eigenvalues(n - 1);
  if (top <= 0.0 || top - bottom <= 1e-12 * std::abs(top)) {
    frame.degenerate = true;
    frame.basis = Eigen::MatrixXd::Identity(n, n);
    frame.eigenvalues = Eigen::VectorXd::Constant(n, std::max(top, 0.0));
  }
  frame.eigenvalues = frame.eigenvalues.cwiseMax(0.0);

  if (cfg.manifold_dim) {
    if (*cfg.manifold_dim < 1 || *cfg.manifold_dim > n - 1)
      throw InvalidArgument("manifold_dim must be in [1, N-1]");
    frame.k = *cfg.manifold_dim;
  } else {
    Eigen::Index normals = 1;
    double best_gap = -1.0;
    for (Eigen::Index l = 0; l + 1 < n; ++l) {
      const double gap = frame.eigenvalues(l) - frame.eigenvalues(l + 1);
      if (gap > best_gap) {
        best_gap = gap;
        normals = l + 1;
      }
    }
    frame.k = static_cast<int>(n - normals);
  }
  return frame;
}

MaterialDataSet vote_dataset(const MaterialDataSet& ds, const VotingConfig& cfg, VotingStats* stats) {
  if (!(cfg.sigma > 0.0)) throw InvalidArgument("sigma must be positive");
  if (cfg.k_neighbors == 0) throw InvalidArgument("k_neighbors must be >= 1");
  if (ds.size() < cfg.k_neighbors + 1)
    throw InvalidArgument("data set needs at least k_neighbors + 1 points for voting");

  const std::size_t n = ds.size();
  std::vector<TangentFrame> frames(n);
  std::vector<VotingStats> local(n);

  auto work = [&](std::size_t i) {
    VotingStats& st = local[i];
    Eigen::MatrixXd r = accumulate_votes(ds, i, cfg, &st);
    if (r.cwiseAbs().maxCoeff() == 0.0 && st.skipped_duplicates < cfg.k_neighbors) {
      r = accumulate_shifted(ds, i, k_nearest_neighbors(ds, i, cfg.k_neighbors), cfg.sigma);
      st.rescaled_points = 1;
    }
    frames[i] = analyze_tensor(r, cfg);
    if (frames[i].degenerate) st.degenerate_frames = 1;
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
  }

  if (stats) {
    for (const auto& st : local) {
      stats->skipped_duplicates += st.skipped_duplicates;
      stats->degenerate_frames += st.degenerate_frames;
      stats->rescaled_points += st.rescaled_points;
    }
  }
  return ds.with_frames(std::move(frames));
}

double angular_error(const MaterialDataSet& ds, const std::vector<Eigen::VectorXd>& reference_tangents) {
  const auto& frames = ds.frames();
  if (reference_tangents.size() != ds.size())
    throw DimensionError("need one reference tangent per data point");
  double sum = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Eigen::VectorXd& ref = reference_tangents[i];
    if (ref.size() != frames[i].size()) throw DimensionError("reference tangent has wrong size");
    const double ref_norm = ref.norm();
    if (ref_norm == 0.0) throw InvalidArgument("zero-length reference tangent");
    // cosine of the angle between ref and the tangent space; for k = 1 this is
    // |t . ref| / (|t| |ref|)
    const double c = (frames[i].tangents().transpose() * ref).norm() / ref_norm;
    sum += std::acos(std::clamp(c, 0.0, 1.0));
  }
  return sum / static_cast<double>(ds.size()) * 180.0 / std::numbers::pi;
}

std::vector<Eigen::VectorXd> reference_tangents(const MaterialDataSet& ds, const ConstitutiveLaw& law,
                                                double strain_bound, std::size_t samples) {
  if (law.dim != 1 || ds.dim() != 1) throw DimensionError("reference tangents need a 1D law");
  if (samples < 2) throw InvalidArgument("need at least two curve samples");
  const auto& metric = ds.metric();
  Eigen::MatrixXd curve(2, static_cast<Eigen::Index>(samples));
  std::vector<double> strains(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const double eps = -strain_bound + 2.0 * strain_bound * static_cast<double>(s) /
                                           static_cast<double>(samples - 1);
    strains[s] = eps;
    const Eigen::VectorXd e = Eigen::VectorXd::Constant(1, eps);
    curve.col(static_cast<Eigen::Index>(s)) = to_learning_space(LocalState(e, law.stress(e)), metric);
  }
  const KdTree tree(std::move(curve));
  std::vector<Eigen::VectorXd> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto nb = tree.nearest(ds.learning_point(i));
    const Eigen::VectorXd e = Eigen::VectorXd::Constant(1, strains[nb.index]);
    Eigen::VectorXd t(2);
    t.head(1) = metric.c_sqrt() * Eigen::VectorXd::Ones(1);
    t.tail(1) = metric.c_inv_sqrt() * law.stiffness(e).col(0);
    out.push_back(t);
  }
  return out;
}

}  // namespace ddcm
