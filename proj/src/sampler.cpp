#include "mnlpm/sampler.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <utility>

namespace mnlpm {

void FitConfig::check() const {
  if (K < 1) throw std::invalid_argument("latent dimension K must be >= 1");
  if (n_burn < 0) throw std::invalid_argument("n_burn must be >= 0");
  if (n_thin < 1) throw std::invalid_argument("n_thin must be >= 1");
  if (n_keep < 1) throw std::invalid_argument("n_keep must be >= 1");
  if (!(adapt.target_accept > 0.0 && adapt.target_accept < 1.0))
    throw std::invalid_argument("target acceptance must lie in (0, 1)");
  if (!(adapt.adapt_rate_decay > 0.5 && adapt.adapt_rate_decay <= 1.0))
    throw std::invalid_argument("adaptation decay must lie in (0.5, 1]");
  if (!std::isfinite(adapt.initial_log_step))
    throw std::invalid_argument("initial log step must be finite");
}

void to_json(nlohmann::json& j, const AdaptConfig& a) {
  j = nlohmann::json{{"target_accept", a.target_accept},
                     {"adapt_rate_decay", a.adapt_rate_decay},
                     {"initial_log_step", a.initial_log_step},
                     {"freeze_after_burnin", a.freeze_after_burnin}};
}

void from_json(const nlohmann::json& j, AdaptConfig& a) {
  a.target_accept = j.value("target_accept", a.target_accept);
  a.adapt_rate_decay = j.value("adapt_rate_decay", a.adapt_rate_decay);
  a.initial_log_step = j.value("initial_log_step", a.initial_log_step);
  a.freeze_after_burnin = j.value("freeze_after_burnin", a.freeze_after_burnin);
}

void to_json(nlohmann::json& j, const FitConfig& c) {
  j = nlohmann::json{{"variant", to_string(c.variant)},
                     {"K", c.K},
                     {"n_burn", c.n_burn},
                     {"n_thin", c.n_thin},
                     {"n_keep", c.n_keep},
                     {"seed", c.seed},
                     {"adapt", c.adapt}};
}

void from_json(const nlohmann::json& j, FitConfig& c) {
  if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
  c.K = j.value("K", c.K);
  c.n_burn = j.value("n_burn", c.n_burn);
  c.n_thin = j.value("n_thin", c.n_thin);
  c.n_keep = j.value("n_keep", c.n_keep);
  c.seed = j.value("seed", c.seed);
  if (j.contains("adapt")) j.at("adapt").get_to(c.adapt);
}

void BlockAdapter::adapt(bool was_accepted, const AdaptConfig& config) {
  ++n_adapt;
  const double gain = std::pow(static_cast<double>(n_adapt), -config.adapt_rate_decay);
  log_step += gain * ((was_accepted ? 1.0 : 0.0) - config.target_accept);
}

namespace {

const Eigen::MatrixXd& averages(const ParameterState& s, Variant variant) {
  return variant == Variant::gmlpm ? s.u[0] : s.eta;
}

double effect(EffectBlock b, const ParameterState& s, int j) {
  return b == EffectBlock::zeta ? s.zeta[j] : s.theta[j];
}

}  // namespace

GaussianConditional eta_conditional(const ParameterState& s, int i) {
  const int J = s.position_layers();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(s.dim());
  for (int j = 0; j < J; ++j) sum += s.u[j].row(i).transpose();
  const double precision = 1.0 / s.kappa2 + J / s.sigma2;
  return {(s.nu / s.kappa2 + sum / s.sigma2) / precision, 1.0 / precision};
}

InverseGammaConditional sigma2_conditional(const ParameterState& s, const Hyperparameters& h) {
  double ss = 0.0;
  for (const auto& uj : s.u) ss += (uj - s.eta).squaredNorm();
  const double n = static_cast<double>(s.n_actors()) * s.position_layers() * s.dim();
  return {h.a_sigma + n / 2.0, h.b_sigma + ss / 2.0};
}

GaussianConditional nu_conditional(const ParameterState& s, const Hyperparameters& h,
                                   Variant variant) {
  const auto& a = averages(s, variant);
  const double precision = 1.0 / h.v2_nu + a.rows() / s.kappa2;
  const Eigen::VectorXd sum = a.colwise().sum().transpose();
  return {(h.m_nu / h.v2_nu + sum / s.kappa2) / precision, 1.0 / precision};
}

InverseGammaConditional kappa2_conditional(const ParameterState& s, const Hyperparameters& h,
                                           Variant variant) {
  const auto& a = averages(s, variant);
  const double ss = (a.rowwise() - s.nu.transpose()).squaredNorm();
  return {h.a_kappa + static_cast<double>(a.size()) / 2.0, h.b_kappa + ss / 2.0};
}

ScalarGaussian mu_conditional(EffectBlock block, const ParameterState& s, const Hyperparameters& h) {
  const bool z = block == EffectBlock::zeta;
  const Eigen::VectorXd& x = z ? s.zeta : s.theta;
  const double m = z ? h.m_zeta : h.m_theta;
  const double v2 = z ? h.v2_zeta : h.v2_theta;
  const double tau2 = z ? s.tau2_zeta : s.tau2_theta;
  const double precision = 1.0 / v2 + x.size() / tau2;
  return {(m / v2 + x.sum() / tau2) / precision, 1.0 / precision};
}

InverseGammaConditional tau2_conditional(EffectBlock block, const ParameterState& s,
                                         const Hyperparameters& h) {
  const bool z = block == EffectBlock::zeta;
  const Eigen::VectorXd& x = z ? s.zeta : s.theta;
  const double mu = z ? s.mu_zeta : s.mu_theta;
  const double a = z ? h.a_zeta : h.a_theta;
  const double b = z ? h.b_zeta : h.b_theta;
  return {a + x.size() / 2.0, b + (x.array() - mu).square().sum() / 2.0};
}

void gibbs_eta(ParameterState& s, Rng& rng) {
  for (int i = 0; i < s.n_actors(); ++i) {
    const auto c = eta_conditional(s, i);
    const double sd = std::sqrt(c.variance);
    for (int k = 0; k < s.dim(); ++k) s.eta(i, k) = rng.normal(c.mean[k], sd);
  }
}

void gibbs_sigma2(ParameterState& s, const Hyperparameters& h, Rng& rng) {
  const auto c = sigma2_conditional(s, h);
  s.sigma2 = rng.inverse_gamma(c.shape, c.rate);
}

void gibbs_nu(ParameterState& s, const Hyperparameters& h, Rng& rng, Variant variant) {
  const auto c = nu_conditional(s, h, variant);
  const double sd = std::sqrt(c.variance);
  for (int k = 0; k < s.dim(); ++k) s.nu[k] = rng.normal(c.mean[k], sd);
}

void gibbs_kappa2(ParameterState& s, const Hyperparameters& h, Rng& rng, Variant variant) {
  const auto c = kappa2_conditional(s, h, variant);
  s.kappa2 = rng.inverse_gamma(c.shape, c.rate);
}

void gibbs_mu(EffectBlock block, ParameterState& s, const Hyperparameters& h, Rng& rng) {
  const auto c = mu_conditional(block, s, h);
  (block == EffectBlock::zeta ? s.mu_zeta : s.mu_theta) = rng.normal(c.mean, std::sqrt(c.variance));
}

void gibbs_tau2(EffectBlock block, ParameterState& s, const Hyperparameters& h, Rng& rng) {
  const auto c = tau2_conditional(block, s, h);
  (block == EffectBlock::zeta ? s.tau2_zeta : s.tau2_theta) = rng.inverse_gamma(c.shape, c.rate);
}

void gibbs_mu_tau(EffectBlock block, ParameterState& s, const Hyperparameters& h, Rng& rng) {
  gibbs_mu(block, s, h, rng);
  gibbs_tau2(block, s, h, rng);
}

namespace {

double incident_loglik(const ParameterState& s, const MultilayerNetwork& net, int i, int j) {
  const auto& pos = s.positions(j);
  const double zeta = s.zeta[j];
  const double scale = std::exp(s.theta[j]);
  double ll = 0.0;
  for (int ip = 0; ip < net.n_actors(); ++ip)
    if (ip != i && net.observed(i, ip, j))
      ll += bernoulli_probit_log(net.edge(i, ip, j), zeta - scale * row_distance(pos, i, ip));
  return ll;
}

double u_likelihood(const ParameterState& s, Variant variant, const MultilayerNetwork& net, int i,
                    int j) {
  if (variant != Variant::gmlpm) return incident_loglik(s, net, i, j);
  double ll = 0.0;
  for (int l = 0; l < net.n_layers(); ++l) ll += incident_loglik(s, net, i, l);
  return ll;
}

double u_prior(const ParameterState& s, Variant variant, int i, int j) {
  const auto row = s.u[j].row(i);
  switch (variant) {
    case Variant::mnlpm:
      return -0.5 * (row - s.eta.row(i)).squaredNorm() / s.sigma2;
    case Variant::gmlpm:
      return -0.5 * (row - s.nu.transpose()).squaredNorm() / s.kappa2;
    case Variant::iflpm:
      return -0.5 * row.squaredNorm() / IndependentPrior::sigma2;
  }
  return 0.0;
}

double effect_prior(EffectBlock b, const ParameterState& s, Variant variant, int j) {
  const double x = effect(b, s, j);
  if (variant == Variant::iflpm)
    return -0.5 * x * x /
           (b == EffectBlock::zeta ? IndependentPrior::tau2_zeta : IndependentPrior::tau2_theta);
  const double mu = b == EffectBlock::zeta ? s.mu_zeta : s.mu_theta;
  const double tau2 = b == EffectBlock::zeta ? s.tau2_zeta : s.tau2_theta;
  return -0.5 * (x - mu) * (x - mu) / tau2;
}

int u_blocks(const ParameterState& s) { return s.n_actors() * s.position_layers(); }

}  // namespace

double log_full_conditional_u(const ParameterState& s, Variant variant, const MultilayerNetwork& net,
                              int i, int j) {
  const int l = variant == Variant::gmlpm ? 0 : j;
  return u_likelihood(s, variant, net, i, l) + u_prior(s, variant, i, l);
}

double log_full_conditional_zeta(const ParameterState& s, Variant variant,
                                 const MultilayerNetwork& net, int j) {
  return layer_log_likelihood(s, net, j) + effect_prior(EffectBlock::zeta, s, variant, j);
}

double log_full_conditional_theta(const ParameterState& s, Variant variant,
                                  const MultilayerNetwork& net, int j) {
  return layer_log_likelihood(s, net, j) + effect_prior(EffectBlock::theta, s, variant, j);
}

Chain::Chain(const MultilayerNetwork& net, const Hyperparameters& hyper, const FitConfig& config)
    : net_(net), hyper_(hyper), config_(config), rng_(config.seed) {
  config_.check();
  if (hyper_.K != config_.K) throw std::invalid_argument("hyperparameters and config disagree on K");
  hyper_.check();
  if (net_.n_actors() < 2 || net_.n_layers() < 1)
    throw std::invalid_argument("need at least 2 actors and 1 layer");
  state_ = sample_prior(hyper_, net_.n_actors(), net_.n_layers(), config_.variant, rng_);
  refresh_cache();
  BlockAdapter init;
  init.log_step = config_.adapt.initial_log_step;
  adapters_.assign(u_blocks(state_) + 2 * net_.n_layers(), init);
  samples_.config = config_;
  samples_.hyper = hyper_;
  samples_.states.reserve(static_cast<std::size_t>(config_.n_keep));
}

Chain::Chain(const MultilayerNetwork& net, ChainSnapshot snap)
    : net_(net),
      hyper_(snap.hyper),
      config_(snap.config),
      rng_(snap.config.seed),
      iteration_(snap.iteration),
      loglik_(snap.loglik),
      state_(std::move(snap.state)),
      adapters_(std::move(snap.adapters)),
      samples_(std::move(snap.retained)) {
  config_.check();
  rng_.set_state(snap.rng_state);
  if (state_.n_actors() != net_.n_actors() || state_.n_layers() != net_.n_layers())
    throw std::invalid_argument("checkpoint does not match the network");
  if (static_cast<int>(adapters_.size()) != u_blocks(state_) + 2 * net_.n_layers())
    throw std::invalid_argument("checkpoint adapter count mismatch");
  const double saved = loglik_;
  refresh_cache();
  loglik_ = saved;
}

BlockAdapter& Chain::u_adapter(int i, int j) {
  return adapters_[static_cast<std::size_t>(i * state_.position_layers() + j)];
}

BlockAdapter& Chain::effect_adapter(EffectBlock block, int j) {
  const int offset = u_blocks(state_) + (block == EffectBlock::theta ? 0 : net_.n_layers());
  return adapters_[static_cast<std::size_t>(offset + j)];
}

bool metropolis_accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

double Chain::dyad_loglik(int i, int ip, int j) const {
  return bernoulli_probit_log(
      net_.edge(i, ip, j),
      probit_linear(state_.zeta[j], state_.theta[j], row_distance(state_.positions(j), i, ip)));
}

void Chain::refresh_cache() {
  const int I = net_.n_actors();
  dyad_loglik_.assign(net_.n_layers(), Eigen::MatrixXd::Zero(I, I));
  loglik_ = 0.0;
  for (int j = 0; j < net_.n_layers(); ++j)
    for (int i = 0; i < I; ++i)
      for (int ip = i + 1; ip < I; ++ip)
        if (net_.observed(i, ip, j)) {
          const double ll = dyad_loglik(i, ip, j);
          dyad_loglik_[j](i, ip) = dyad_loglik_[j](ip, i) = ll;
          loglik_ += ll;
        }
}

bool Chain::mh_u(int i, int j, BlockAdapter& a) {
  const Variant v = config_.variant;
  const int I = net_.n_actors();
  const int first = v == Variant::gmlpm ? 0 : j;
  const int last = v == Variant::gmlpm ? net_.n_layers() : j + 1;
  Eigen::MatrixXd& pos = state_.u[j];
  const Eigen::RowVectorXd current = pos.row(i);
  const double old_prior = u_prior(state_, v, i, j);
  double old_lik = 0.0;
  for (int l = first; l < last; ++l) old_lik += dyad_loglik_[l].row(i).sum();

  const double step = a.step();
  for (int k = 0; k < state_.dim(); ++k) pos(i, k) = current[k] + step * rng_.normal();
  scratch_.setZero(static_cast<Eigen::Index>(last - first) * I);
  double new_lik = 0.0;
  for (int l = first; l < last; ++l)
    for (int ip = 0; ip < I; ++ip)
      if (ip != i && net_.observed(i, ip, l)) {
        const double ll = dyad_loglik(i, ip, l);
        scratch_[(l - first) * I + ip] = ll;
        new_lik += ll;
      }
  const double new_prior = u_prior(state_, v, i, j);
  if (metropolis_accept(new_lik + new_prior - old_lik - old_prior, rng_)) {
    for (int l = first; l < last; ++l)
      for (int ip = 0; ip < I; ++ip)
        dyad_loglik_[l](i, ip) = dyad_loglik_[l](ip, i) = scratch_[(l - first) * I + ip];
    loglik_ += new_lik - old_lik;
    return true;
  }
  pos.row(i) = current;
  return false;
}

bool Chain::mh_effect(EffectBlock block, int j, BlockAdapter& a) {
  const Variant v = config_.variant;
  const int I = net_.n_actors();
  double& x = block == EffectBlock::zeta ? state_.zeta[j] : state_.theta[j];
  const double current = x;
  const double old_lik = dyad_loglik_[j].sum() / 2.0;
  const double old_prior = effect_prior(block, state_, v, j);
  x = current + a.step() * rng_.normal();
  scratch_.setZero(static_cast<Eigen::Index>(I) * I);
  double new_lik = 0.0;
  for (int i = 0; i < I; ++i)
    for (int ip = i + 1; ip < I; ++ip)
      if (net_.observed(i, ip, j)) {
        const double ll = dyad_loglik(i, ip, j);
        scratch_[i * I + ip] = scratch_[ip * I + i] = ll;
        new_lik += ll;
      }
  const double new_prior = effect_prior(block, state_, v, j);
  if (metropolis_accept(new_lik + new_prior - old_lik - old_prior, rng_)) {
    dyad_loglik_[j] = Eigen::Map<const Eigen::MatrixXd>(scratch_.data(), I, I);
    loglik_ += new_lik - old_lik;
    return true;
  }
  x = current;
  return false;
}

void Chain::sweep() {
  const Variant v = config_.variant;
  const bool burning = iteration_ < config_.n_burn;
  const bool adapting = burning || !config_.adapt.freeze_after_burnin;
  auto tally = [&](BlockAdapter& a, bool accepted) {
    if (adapting) a.adapt(accepted, config_.adapt);
    if (!burning) {
      ++a.proposed;
      if (accepted) ++a.accepted;
    }
  };

  // 1: positions, lexicographic in (i, j).
  for (int i = 0; i < state_.n_actors(); ++i)
    for (int j = 0; j < state_.position_layers(); ++j) {
      auto& a = u_adapter(i, j);
      tally(a, mh_u(i, j, a));
    }
  if (v == Variant::gmlpm) state_.eta = state_.u[0];

  if (v != Variant::iflpm) {
    if (v == Variant::mnlpm) {
      gibbs_eta(state_, rng_);              // 2
      gibbs_sigma2(state_, hyper_, rng_);   // 3
    }
    gibbs_nu(state_, hyper_, rng_, v);      // 4
    gibbs_kappa2(state_, hyper_, rng_, v);  // 5
  }

  for (int j = 0; j < net_.n_layers(); ++j) {  // 6
    auto& a = effect_adapter(EffectBlock::theta, j);
    tally(a, mh_effect(EffectBlock::theta, j, a));
  }
  if (v != Variant::iflpm) gibbs_mu_tau(EffectBlock::theta, state_, hyper_, rng_);  // 7, 8

  for (int j = 0; j < net_.n_layers(); ++j) {  // 9
    auto& a = effect_adapter(EffectBlock::zeta, j);
    tally(a, mh_effect(EffectBlock::zeta, j, a));
  }
  if (v != Variant::iflpm) gibbs_mu_tau(EffectBlock::zeta, state_, hyper_, rng_);  // 10, 11

  ++iteration_;
  if (iteration_ % kLoglikResync == 0) refresh_cache();
  if (!std::isfinite(loglik_))
    throw NumericError("non-finite log-likelihood at iteration " + std::to_string(iteration_));
}

void Chain::run(long until) {
  until = std::min(until, config_.total_iterations());
  while (iteration_ < until) {
    sweep();
    const long post = iteration_ - config_.n_burn;
    if (post > 0 && post % config_.n_thin == 0) {
      const double exact = log_likelihood(state_, config_.variant, net_);
      if (!std::isfinite(exact))
        throw NumericError("non-finite log-likelihood at iteration " + std::to_string(iteration_));
      samples_.states.push_back(state_);
      samples_.iterations.push_back(iteration_);
      samples_.loglik.push_back(exact);
    }
  }
  if (done()) record_acceptance();
}

void Chain::record_acceptance() {
  const bool shared = state_.position_layers() == 1 && config_.variant == Variant::gmlpm;
  samples_.acceptance.clear();
  auto push = [&](std::string name, const BlockAdapter& a) {
    samples_.acceptance.push_back({std::move(name), a.proposed, a.accepted, a.rate(), a.step()});
  };
  for (int i = 0; i < state_.n_actors(); ++i)
    for (int j = 0; j < state_.position_layers(); ++j)
      push(shared ? "u[" + std::to_string(i + 1) + "]"
                  : "u[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]",
           u_adapter(i, j));
  for (int j = 0; j < net_.n_layers(); ++j)
    push("theta[" + std::to_string(j + 1) + "]", effect_adapter(EffectBlock::theta, j));
  for (int j = 0; j < net_.n_layers(); ++j)
    push("zeta[" + std::to_string(j + 1) + "]", effect_adapter(EffectBlock::zeta, j));
}

ChainSnapshot Chain::snapshot() const {
  ChainSnapshot s;
  s.config = config_;
  s.hyper = hyper_;
  s.iteration = iteration_;
  s.rng_state = rng_.state();
  s.loglik = loglik_;
  s.state = state_;
  s.adapters = adapters_;
  s.retained = samples_;
  return s;
}

PosteriorSamples Chain::take_samples() { return std::move(samples_); }

namespace {

PosteriorSamples drive(Chain& chain, const RunHooks& hooks, long total) {
  if (hooks.checkpoint_every > 0 && hooks.on_checkpoint) {
    while (!chain.done()) {
      const long next = (chain.iteration() / hooks.checkpoint_every + 1) * hooks.checkpoint_every;
      chain.run(std::min(next, total));
      if (!chain.done()) hooks.on_checkpoint(chain.snapshot());
    }
  } else {
    chain.run();
  }
  return chain.take_samples();
}

}  // namespace

PosteriorSamples run_mcmc(const MultilayerNetwork& net, const Hyperparameters& hyper,
                          const FitConfig& config, const RunHooks& hooks) {
  Chain chain(net, hyper, config);
  return drive(chain, hooks, config.total_iterations());
}

PosteriorSamples resume_mcmc(const MultilayerNetwork& net, ChainSnapshot snapshot,
                             const RunHooks& hooks) {
  const long total = snapshot.config.total_iterations();
  Chain chain(net, std::move(snapshot));
  return drive(chain, hooks, total);
}

double effective_sample_size(const std::vector<double>& trace) {
  const long n = static_cast<long>(trace.size());
  if (n < 10) throw std::invalid_argument("effective_sample_size needs at least 10 values");
  if (std::adjacent_find(trace.begin(), trace.end(), std::not_equal_to<>()) == trace.end())
    return static_cast<double>(n);
  const double mean = std::accumulate(trace.begin(), trace.end(), 0.0) / n;
  std::vector<double> x(trace.size());
  for (long t = 0; t < n; ++t) x[t] = trace[t] - mean;
  auto autocov = [&](long lag) {
    double s = 0.0;
    for (long t = 0; t + lag < n; ++t) s += x[t] * x[t + lag];
    return s / n;
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return static_cast<double>(n);

  // Initial positive sequence: Gamma_m = rho_{2m} + rho_{2m+1} while positive.
  double sum_gamma = 0.0;
  for (long m = 0; 2 * m + 1 < n; ++m) {
    const double gamma = (autocov(2 * m) + autocov(2 * m + 1)) / c0;
    if (!(gamma > 0.0)) break;
    sum_gamma += gamma;
  }
  const double tau = -1.0 + 2.0 * sum_gamma;
  if (!(tau > 1.0)) return static_cast<double>(n);
  return n / tau;
}

std::vector<double> parameter_trace(const PosteriorSamples& samples,
                                    const std::function<double(const ParameterState&)>& f) {
  std::vector<double> out;
  out.reserve(samples.states.size());
  for (const auto& s : samples.states) out.push_back(f(s));
  return out;
}

}  // namespace mnlpm
