#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mnlpm/network.hpp"
#include "mnlpm/postprocess.hpp"
#include "mnlpm/sampler.hpp"

namespace mnlpm {

struct WaicReport {
  double waic = NAN;
  double p_waic = NAN;
  double lppd = NAN;
  std::vector<Triple> points;         // observed i < i' triples
  std::vector<double> point_lppd;     // log E[p(y_n)]
  std::vector<double> point_p_waic;   // 2 (log E[p] - E[log p])
};

/// WAIC from a B x N matrix of pointwise log-densities.
WaicReport waic_from_pointwise(const Eigen::MatrixXd& log_density);
/// B x N pointwise Bernoulli log-densities over the observed triples.
Eigen::MatrixXd pointwise_log_density(const PosteriorSamples& samples, const MultilayerNetwork& net,
                                      std::vector<Triple>* points = nullptr);
WaicReport waic(const PosteriorSamples& samples, const MultilayerNetwork& net);

struct WaicScanRow {
  int K = 0;
  double waic = NAN;
  double p_waic = NAN;
  double lppd = NAN;
  std::string error;  // nonempty when the fit failed
};

struct WaicScan {
  std::vector<WaicScanRow> rows;  // sorted by K
  int best_K = 0;                 // 0 when every fit failed
};

/// Fits each K with elicit(K, theta0) and the child seed derive_seed(seed, K).
/// `on_fit` sees every successful fit (called from worker threads).
WaicScan waic_scan(const MultilayerNetwork& net, Variant variant, const std::vector<int>& K_set,
                   const FitConfig& base, double theta0 = 0.1, int jobs = 1,
                   const std::function<void(int, const PosteriorSamples&)>& on_fit = {});

/// y ~ Bernoulli(theta_ii'j) independently; same labels as `shape`, fully observed.
MultilayerNetwork replicate_network(const ParameterState& state, Variant variant,
                                    const MultilayerNetwork& shape, Rng& rng);

enum class GraphStat {
  density,
  clustering_coefficient,
  assortativity,
  mean_geodesic,
  mean_eigen_centrality,
  mean_degree
};
inline constexpr GraphStat kAllGraphStats[] = {
    GraphStat::density,       GraphStat::clustering_coefficient, GraphStat::assortativity,
    GraphStat::mean_geodesic, GraphStat::mean_eigen_centrality,  GraphStat::mean_degree};
std::string to_string(GraphStat s);

/// NaN where undefined: clustering without connected triples, assortativity
/// with constant edge-end degrees, geodesics and eigen-centrality without edges.
double graph_statistic(const BinaryMatrix& layer, GraphStat stat);

struct PpcRow {
  int layer = 0;  // 0-based
  GraphStat stat = GraphStat::density;
  double observed = NAN;
  IntervalSummary replicated;
  long valid = 0;                  // replicates where the statistic is defined
  std::optional<bool> contained;   // empty when undefined
};

struct PpcReport {
  long n_replicates = 0;
  std::vector<PpcRow> rows;
};

/// One replicate per selected retained state (evenly spaced when
/// n_replicates < B).
PpcReport posterior_predictive_check(const PosteriorSamples& samples, const MultilayerNetwork& net,
                                     long n_replicates, std::uint64_t seed);

struct ConvergenceRow {
  std::string parameter;
  double ess = NAN;
  double mean = NAN;
  double sd = NAN;
  double geweke_z = NAN;
};

/// Geweke z of the first 10% against the last 50%; 0 for a constant trace.
double geweke_z(const std::vector<double>& trace);
std::vector<ConvergenceRow> convergence_report(const PosteriorSamples& samples);

void write_waic_csv(std::ostream& out, const std::vector<WaicScanRow>& rows);
void write_ppc_csv(std::ostream& out, const PpcReport& report,
                   const std::vector<std::string>& layer_labels);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);

}  // namespace mnlpm
