#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "mnlpm/network.hpp"
#include "mnlpm/normal.hpp"

namespace mnlpm {

/// MNLPM: hierarchical per-layer positions. IFLPM: independent single-layer
/// fits with fixed priors. GMLPM: one position per actor shared by all layers.
enum class Variant { mnlpm = 0, iflpm = 1, gmlpm = 2 };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

/// Fixed constants of the hierarchical prior. V_nu = v2_nu * Identity.
struct Hyperparameters {
  int K = 2;
  double theta0 = 0.1;
  double a_sigma = 3, b_sigma = 2.0 / 27.0;
  double a_zeta = 3, b_zeta = 1;
  double a_theta = 3, b_theta = 1;
  double a_kappa = 3, b_kappa = 2.0 / 27.0;
  double m_zeta = 0, v2_zeta = 1;
  double m_theta = 0, v2_theta = 1;
  Eigen::VectorXd m_nu = Eigen::VectorXd::Zero(2);
  double v2_nu = 1.0 / 27.0;

  /// Throws std::invalid_argument on a nonpositive shape, rate or variance.
  void check() const;
  friend bool operator==(const Hyperparameters&, const Hyperparameters&);
};

void to_json(nlohmann::json& j, const Hyperparameters& h);
void from_json(const nlohmann::json& j, Hyperparameters& h);

/// Priors of the independently fitted single-network model.
struct IndependentPrior {
  static constexpr double tau2_zeta = 3.0;
  static constexpr double tau2_theta = 3.0;
  static constexpr double sigma2 = 1.0 / 9.0;
};

/// Mean and sd of the norm of a N_K(0, variance * I) vector.
struct DistanceMoments {
  double mean;
  double sd;
};
DistanceMoments latent_distance_moments(int K, double variance_per_coordinate = 2.0 / 9.0);

/// Prior elicitation: equal variance split, var(u) = 1/9, delta-method
/// variance for theta, var(zeta) = 4 E[d]. Throws std::invalid_argument
/// when K < 1 or the delta-method log argument is not positive.
Hyperparameters elicit(int K, double theta0 = 0.1);

/// One row of the elicitation table (E[d], sd[d], rates, prior sds).
struct ElicitationRow {
  int K;
  double mean_distance, sd_distance;
  double b_zeta, b_theta, b_sigma, b_kappa;
  double v_zeta, v_theta, v_nu;
};
ElicitationRow elicitation_row(const Hyperparameters& h);

/// One realization of all model parameters.
///
/// u holds one I x K matrix per layer (a single matrix for GMLPM). Levels a
/// variant does not sample hold fixed values: IFLPM keeps eta = 0, nu = 0,
/// mu = 0, tau2 = 3, sigma2 = kappa2 = 1/9; GMLPM mirrors eta = u and keeps
/// sigma2 at its prior mean.
struct ParameterState {
  Eigen::VectorXd zeta;
  Eigen::VectorXd theta;
  std::vector<Eigen::MatrixXd> u;
  Eigen::MatrixXd eta;
  double sigma2 = 1.0 / 9.0;
  double mu_zeta = 0, tau2_zeta = 1;
  double mu_theta = 0, tau2_theta = 1;
  Eigen::VectorXd nu;
  double kappa2 = 1.0 / 9.0;

  int n_actors() const { return static_cast<int>(eta.rows()); }
  int n_layers() const { return static_cast<int>(zeta.size()); }
  int dim() const { return static_cast<int>(eta.cols()); }
  int position_layers() const { return static_cast<int>(u.size()); }

  /// Positions used by layer j (the shared matrix when positions are shared).
  const Eigen::MatrixXd& positions(int j) const { return u.size() == 1 ? u[0] : u[j]; }
  Eigen::MatrixXd& positions(int j) { return u.size() == 1 ? u[0] : u[j]; }

  static ParameterState zeros(int I, int J, int K, Variant variant);
  friend bool operator==(const ParameterState&, const ParameterState&);
};

/// IK(J + 1) + 2J + K + 6.
long parameter_count(int I, int J, int K);

/// Euclidean distance between rows `i` and `ip` of a position matrix.
template <typename Derived>
typename Derived::Scalar row_distance(const Eigen::MatrixBase<Derived>& positions, int i, int ip) {
  return (positions.row(i) - positions.row(ip)).norm();
}

/// Probit link: Phi(zeta - exp(theta) * distance).
template <typename Scalar>
Scalar probit_linear(Scalar zeta, Scalar theta, Scalar distance) {
  return zeta - std::exp(theta) * distance;
}

/// Throws std::invalid_argument when i == ip (structural zero).
double interaction_probability(const ParameterState& s, Variant variant, int i, int ip, int j);

/// Sum over observed i < ip of the Bernoulli log-density; masked triples
/// contribute nothing.
double log_likelihood(const ParameterState& s, Variant variant, const MultilayerNetwork& net);

/// Log-likelihood contribution of one layer.
double layer_log_likelihood(const ParameterState& s, const MultilayerNetwork& net, int j);

/// Log prior split by level. `positions` covers u, `averages` covers eta,
/// `layer_effects` covers zeta and theta, `hyper` the top-level draws.
struct PriorTerms {
  double positions = 0;
  double averages = 0;
  double layer_effects = 0;
  double hyper = 0;
  double total() const { return positions + averages + layer_effects + hyper; }
};
PriorTerms log_prior_terms(const ParameterState& s, Variant variant, const Hyperparameters& h);
double log_prior(const ParameterState& s, Variant variant, const Hyperparameters& h);

class Rng;

/// Top-down draw: variances, then means, then eta, then u.
ParameterState sample_prior(const Hyperparameters& h, int I, int J, Variant variant, Rng& rng);
ParameterState sample_prior(const Hyperparameters& h, int I, int J, Variant variant,
                            std::uint64_t seed);

/// Each draw runs the full hierarchical cascade for one dyad in one layer.
std::vector<double> prior_predictive_probabilities(const Hyperparameters& h, int n_draws,
                                                   std::uint64_t seed);

}  // namespace mnlpm
