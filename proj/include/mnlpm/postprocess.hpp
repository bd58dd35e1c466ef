#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "mnlpm/network.hpp"
#include "mnlpm/sampler.hpp"

namespace mnlpm {

/// Posterior mean with 2.5% / 97.5% quantiles; significant when the
/// interval excludes zero.
struct IntervalSummary {
  double point = NAN;
  double lo = NAN;
  double hi = NAN;
  bool significant = false;
};

/// Sample quantile, linear interpolation between order statistics (type 7).
/// `sorted` must be ascending and nonempty.
double quantile_sorted(const std::vector<double>& sorted, double p);
IntervalSummary summarize(std::vector<double> values);

/// Orthogonal Q minimizing ||reference - target * Q||_F (reflections allowed).
/// With L D R' = svd(reference' target), Q = R L'.
template <typename DerivedA, typename DerivedB>
Eigen::MatrixXd procrustes_rotation(const Eigen::MatrixBase<DerivedA>& reference,
                                    const Eigen::MatrixBase<DerivedB>& target) {
  if (reference.cols() == 0) throw std::invalid_argument("procrustes: K must be >= 1");
  if (reference.rows() != target.rows() || reference.cols() != target.cols())
    throw std::invalid_argument("procrustes: configurations differ in shape");
  if (!reference.allFinite() || !target.allFinite())
    throw std::invalid_argument("procrustes: non-finite entries");
  const Eigen::MatrixXd cross = reference.transpose() * target;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixV() * svd.matrixU().transpose();
}

/// Procrustes-aligned copies of the position blocks of every sample.
///
/// Samples are anchored on the averages eta (the shared positions for
/// GMLPM) of the reference sample. IFLPM has no averages, so each layer is
/// aligned separately to its own reference positions; rotations[b] then
/// holds one matrix per layer.
struct AlignedSamples {
  Variant variant = Variant::mnlpm;
  int reference_index = 0;
  std::vector<std::vector<Eigen::MatrixXd>> rotations;  // [b][0] or [b][j]
  std::vector<std::vector<Eigen::MatrixXd>> u;          // [b][l]
  std::vector<Eigen::MatrixXd> eta;                     // [b]

  long size() const { return static_cast<long>(u.size()); }
  int n_actors() const { return static_cast<int>(u.front().front().rows()); }
  int position_layers() const { return static_cast<int>(u.front().size()); }
  int dim() const { return static_cast<int>(u.front().front().cols()); }
};

AlignedSamples align_samples(const PosteriorSamples& samples);

/// Mean over samples of Phi(mu_zeta - exp(mu_theta) ||eta_i - eta_i'||);
/// zero diagonal. Requires MNLPM samples.
Eigen::MatrixXd consensus_network(const PosteriorSamples& samples);

/// Proportion of layers with an edge between i and i'.
Eigen::MatrixXd empirical_consensus(const MultilayerNetwork& net);
/// Edge where at least threshold * J layers have one.
BinaryMatrix majority_consensus(const MultilayerNetwork& net, double threshold = 0.5);

enum class PositionStat { max, median };
PositionStat parse_position_stat(const std::string& name);

struct LayerCorrelation {
  std::vector<std::vector<IntervalSummary>> rho;  // J x J
  Eigen::MatrixXi excluded;                       // samples dropped per pair
};

/// Per-sample Pearson correlation of the per-actor summaries u*_ij (max or
/// median over dimensions) between layers, summarized over samples.
LayerCorrelation layer_correlation(const AlignedSamples& aligned,
                                   PositionStat stat = PositionStat::max);

/// delta_i = ||u_ii|| - ||mean over j != i of u_ij||. Requires J = I.
std::vector<IntervalSummary> assessment_index(const AlignedSamples& aligned);

struct PositionSummary {
  std::vector<Eigen::MatrixXd> mean;      // [l] I x K
  std::vector<Eigen::MatrixXd> variance;  // [l] I x K
  Eigen::MatrixXd eta_mean;
  Eigen::MatrixXd eta_variance;
  std::vector<int> dimension_rank;  // dimensions by decreasing spread of mean positions
};

PositionSummary position_summary(const AlignedSamples& aligned);

void write_consensus_csv(std::ostream& out, const Eigen::MatrixXd& c,
                         const std::vector<ActorInfo>& actors);
void write_correlation_csv(std::ostream& out, const LayerCorrelation& r);
void write_delta_csv(std::ostream& out, const std::vector<IntervalSummary>& delta);
/// Rows (i, j, k, mean, var), 1-based; j = 0 holds the averages eta.
void write_positions_csv(std::ostream& out, const PositionSummary& p);
/// Scatter of mean positions on the two leading dimensions, one panel per layer.
void write_positions_svg(std::ostream& out, const PositionSummary& p,
                         const std::vector<ActorInfo>& actors,
                         const std::vector<std::string>& layer_labels);

}  // namespace mnlpm
