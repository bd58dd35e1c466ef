#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "mnlpm/model.hpp"
#include "mnlpm/network.hpp"
#include "mnlpm/random.hpp"

namespace mnlpm {

/// Non-finite log-likelihood or similar numeric breakdown (CLI exit code 4).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdaptConfig {
  double target_accept = 0.35;
  double adapt_rate_decay = 0.8;
  double initial_log_step = std::log(0.1);
  bool freeze_after_burnin = true;
  friend bool operator==(const AdaptConfig&, const AdaptConfig&) = default;
};

struct FitConfig {
  Variant variant = Variant::mnlpm;
  int K = 2;
  long n_burn = 100000;
  long n_thin = 10;
  long n_keep = 10000;
  std::uint64_t seed = 1;
  AdaptConfig adapt;

  long total_iterations() const { return n_burn + n_thin * n_keep; }
  /// Throws std::invalid_argument when a count or adaptation setting is out of range.
  void check() const;
  friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

void to_json(nlohmann::json& j, const AdaptConfig& a);
void from_json(const nlohmann::json& j, AdaptConfig& a);
void to_json(nlohmann::json& j, const FitConfig& c);
void from_json(const nlohmann::json& j, FitConfig& c);

/// Robbins-Monro adaptation of one Metropolis block's log step size.
struct BlockAdapter {
  double log_step = std::log(0.1);
  long n_adapt = 0;
  long proposed = 0;  // post burn-in
  long accepted = 0;  // post burn-in

  double step() const { return std::exp(log_step); }
  void adapt(bool was_accepted, const AdaptConfig& config);
  double rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : NAN; }
};

struct BlockAcceptance {
  std::string block;  // "u[i,j]", "zeta[j]" or "theta[j]", 1-based
  long proposed = 0;
  long accepted = 0;
  double rate = NAN;
  double step = NAN;
};

struct PosteriorSamples {
  std::vector<ParameterState> states;
  std::vector<long> iterations;  // sweep index of each retained state, 1-based
  std::vector<double> loglik;
  std::vector<BlockAcceptance> acceptance;
  FitConfig config;
  Hyperparameters hyper;

  long size() const { return static_cast<long>(states.size()); }
  Variant variant() const { return config.variant; }
};

// Full conditionals of the conjugate blocks.

struct GaussianConditional {
  Eigen::VectorXd mean;
  double variance;
};

struct ScalarGaussian {
  double mean;
  double variance;
};

struct InverseGammaConditional {
  double shape;
  double rate;
};

enum class EffectBlock { zeta, theta };

/// eta_i | rest: precision 1/kappa2 + J/sigma2.
GaussianConditional eta_conditional(const ParameterState& s, int i);
/// sigma2 | rest: IG(a + IJK/2, b + sum ||u_ij - eta_i||^2 / 2).
InverseGammaConditional sigma2_conditional(const ParameterState& s, const Hyperparameters& h);
/// nu | rest; the averages are eta (MNLPM) or the shared positions (GMLPM).
GaussianConditional nu_conditional(const ParameterState& s, const Hyperparameters& h,
                                   Variant variant = Variant::mnlpm);
/// kappa2 | rest: IG(a + IK/2, b + sum ||eta_i - nu||^2 / 2).
InverseGammaConditional kappa2_conditional(const ParameterState& s, const Hyperparameters& h,
                                           Variant variant = Variant::mnlpm);
ScalarGaussian mu_conditional(EffectBlock block, const ParameterState& s, const Hyperparameters& h);
InverseGammaConditional tau2_conditional(EffectBlock block, const ParameterState& s,
                                         const Hyperparameters& h);

void gibbs_eta(ParameterState& s, Rng& rng);
void gibbs_sigma2(ParameterState& s, const Hyperparameters& h, Rng& rng);
void gibbs_nu(ParameterState& s, const Hyperparameters& h, Rng& rng,
              Variant variant = Variant::mnlpm);
void gibbs_kappa2(ParameterState& s, const Hyperparameters& h, Rng& rng,
                  Variant variant = Variant::mnlpm);
void gibbs_mu(EffectBlock block, ParameterState& s, const Hyperparameters& h, Rng& rng);
void gibbs_tau2(EffectBlock block, ParameterState& s, const Hyperparameters& h, Rng& rng);
/// mu then tau2 for one block.
void gibbs_mu_tau(EffectBlock block, ParameterState& s, const Hyperparameters& h, Rng& rng);

// Unnormalized log full conditionals of the Metropolis blocks.

/// Likelihood of the observed dyads incident to actor i in layer j (all
/// layers when positions are shared) plus the Gaussian prior of u_ij.
double log_full_conditional_u(const ParameterState& s, Variant variant, const MultilayerNetwork& net,
                              int i, int j);
double log_full_conditional_zeta(const ParameterState& s, Variant variant,
                                 const MultilayerNetwork& net, int j);
double log_full_conditional_theta(const ParameterState& s, Variant variant,
                                  const MultilayerNetwork& net, int j);

/// Metropolis rule: accept when log_ratio >= 0, else with probability exp(log_ratio).
/// Draws a uniform only in the second case.
bool metropolis_accept(double log_ratio, Rng& rng);

/// Everything needed to continue a chain exactly where it stopped.
struct ChainSnapshot {
  FitConfig config;
  Hyperparameters hyper;
  long iteration = 0;
  std::array<std::uint64_t, 4> rng_state{};
  double loglik = 0;
  ParameterState state;
  std::vector<BlockAdapter> adapters;
  PosteriorSamples retained;
};

/// One MCMC chain over the sweep order u, eta, sigma2, nu, kappa2, theta,
/// mu_theta, tau2_theta, zeta, mu_zeta, tau2_zeta, restricted to the blocks
/// present in the variant.
class Chain {
 public:
  Chain(const MultilayerNetwork& net, const Hyperparameters& hyper, const FitConfig& config);
  Chain(const MultilayerNetwork& net, ChainSnapshot snapshot);

  /// Runs until `until` sweeps in total (capped at the configured total).
  void run(long until);
  void run() { run(config_.total_iterations()); }
  bool done() const { return iteration_ >= config_.total_iterations(); }

  long iteration() const { return iteration_; }
  const ParameterState& state() const { return state_; }
  double loglik() const { return loglik_; }
  const std::vector<BlockAdapter>& adapters() const { return adapters_; }

  ChainSnapshot snapshot() const;
  /// Moves the retained samples out; the chain should not be used afterwards.
  PosteriorSamples take_samples();

 private:
  void sweep();
  double dyad_loglik(int i, int ip, int j) const;
  void refresh_cache();
  bool mh_u(int i, int j, BlockAdapter& a);
  bool mh_effect(EffectBlock block, int j, BlockAdapter& a);
  void record_acceptance();
  BlockAdapter& u_adapter(int i, int j);
  BlockAdapter& effect_adapter(EffectBlock block, int j);

  const MultilayerNetwork& net_;
  Hyperparameters hyper_;
  FitConfig config_;
  Rng rng_;
  long iteration_ = 0;
  double loglik_ = 0;
  std::vector<Eigen::MatrixXd> dyad_loglik_;  // [j] symmetric, 0 where masked
  Eigen::VectorXd scratch_;
  ParameterState state_;
  std::vector<BlockAdapter> adapters_;
  PosteriorSamples samples_;
};

/// Sweeps between full log-likelihood recomputations.
inline constexpr long kLoglikResync = 1000;

struct RunHooks {
  long checkpoint_every = 0;  // sweeps; 0 disables
  std::function<void(const ChainSnapshot&)> on_checkpoint;
};

PosteriorSamples run_mcmc(const MultilayerNetwork& net, const Hyperparameters& hyper,
                          const FitConfig& config, const RunHooks& hooks = {});
PosteriorSamples resume_mcmc(const MultilayerNetwork& net, ChainSnapshot snapshot,
                             const RunHooks& hooks = {});

/// B / (1 + 2 sum rho_k), autocorrelations summed by Geyer's initial positive
/// sequence; a constant trace gives B. Result in (0, B].
double effective_sample_size(const std::vector<double>& trace);

/// Trace of a scalar parameter over the retained states.
std::vector<double> parameter_trace(const PosteriorSamples& samples,
                                    const std::function<double(const ParameterState&)>& f);

}  // namespace mnlpm
