#include "mnlpm/model.hpp"

#include <stdexcept>

#include "mnlpm/random.hpp"

namespace mnlpm {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::mnlpm: return "MNLPM";
    case Variant::iflpm: return "IFLPM";
    case Variant::gmlpm: return "GMLPM";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (n == "MNLPM") return Variant::mnlpm;
  if (n == "IFLPM") return Variant::iflpm;
  if (n == "GMLPM") return Variant::gmlpm;
  throw std::invalid_argument("unknown model variant '" + name + "'");
}

void Hyperparameters::check() const {
  if (K < 1) throw std::invalid_argument("latent dimension K must be >= 1");
  if (!(theta0 > 0.0 && theta0 < 1.0)) throw std::invalid_argument("theta0 must lie in (0, 1)");
  for (double v : {a_sigma, b_sigma, a_zeta, b_zeta, a_theta, b_theta, a_kappa, b_kappa, v2_zeta,
                   v2_theta, v2_nu})
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("hyperparameter shapes, rates and variances must be positive");
  if (m_nu.size() != K) throw std::invalid_argument("m_nu must have K entries");
}

bool operator==(const Hyperparameters& a, const Hyperparameters& b) {
  return a.K == b.K && a.theta0 == b.theta0 && a.a_sigma == b.a_sigma && a.b_sigma == b.b_sigma &&
         a.a_zeta == b.a_zeta && a.b_zeta == b.b_zeta && a.a_theta == b.a_theta &&
         a.b_theta == b.b_theta && a.a_kappa == b.a_kappa && a.b_kappa == b.b_kappa &&
         a.m_zeta == b.m_zeta && a.v2_zeta == b.v2_zeta && a.m_theta == b.m_theta &&
         a.v2_theta == b.v2_theta && a.m_nu.size() == b.m_nu.size() && a.m_nu == b.m_nu &&
         a.v2_nu == b.v2_nu;
}

void to_json(nlohmann::json& j, const Hyperparameters& h) {
  j = nlohmann::json{{"K", h.K},
                     {"theta0", h.theta0},
                     {"a_sigma", h.a_sigma},
                     {"b_sigma", h.b_sigma},
                     {"a_zeta", h.a_zeta},
                     {"b_zeta", h.b_zeta},
                     {"a_theta", h.a_theta},
                     {"b_theta", h.b_theta},
                     {"a_kappa", h.a_kappa},
                     {"b_kappa", h.b_kappa},
                     {"m_zeta", h.m_zeta},
                     {"m_theta", h.m_theta},
                     {"v2_zeta", h.v2_zeta},
                     {"v2_theta", h.v2_theta},
                     {"m_nu", std::vector<double>(h.m_nu.data(), h.m_nu.data() + h.m_nu.size())},
                     {"v2_nu", h.v2_nu}};
}

void from_json(const nlohmann::json& j, Hyperparameters& h) {
  j.at("K").get_to(h.K);
  j.at("theta0").get_to(h.theta0);
  j.at("a_sigma").get_to(h.a_sigma);
  j.at("b_sigma").get_to(h.b_sigma);
  j.at("a_zeta").get_to(h.a_zeta);
  j.at("b_zeta").get_to(h.b_zeta);
  j.at("a_theta").get_to(h.a_theta);
  j.at("b_theta").get_to(h.b_theta);
  j.at("a_kappa").get_to(h.a_kappa);
  j.at("b_kappa").get_to(h.b_kappa);
  j.at("m_zeta").get_to(h.m_zeta);
  j.at("m_theta").get_to(h.m_theta);
  j.at("v2_zeta").get_to(h.v2_zeta);
  j.at("v2_theta").get_to(h.v2_theta);
  const auto m_nu = j.at("m_nu").get<std::vector<double>>();
  h.m_nu = Eigen::Map<const Eigen::VectorXd>(m_nu.data(), static_cast<Eigen::Index>(m_nu.size()));
  j.at("v2_nu").get_to(h.v2_nu);
}

DistanceMoments latent_distance_moments(int K, double variance_per_coordinate) {
  // ||x|| / s is chi with K degrees of freedom.
  const double s = std::sqrt(variance_per_coordinate);
  const double mean = s * std::sqrt(2.0) * std::exp(std::lgamma((K + 1) / 2.0) - std::lgamma(K / 2.0));
  return {mean, std::sqrt(K * variance_per_coordinate - mean * mean)};
}

Hyperparameters elicit(int K, double theta0) {
  if (K < 1) throw std::invalid_argument("latent dimension K must be >= 1");
  if (!(theta0 > 0.0 && theta0 < 1.0)) throw std::invalid_argument("theta0 must lie in (0, 1)");
  const double mean_distance = latent_distance_moments(K).mean;
  const double log_arg = -std_normal_quantile(theta0) / mean_distance;
  if (!(log_arg > 0.0))
    throw std::invalid_argument("theta0 must be below 0.5 (delta-method log argument <= 0)");
  const double var_theta = 2.0 * std::log(log_arg);
  if (!(var_theta > 0.0))
    throw std::invalid_argument("theta0 too large for K: delta-method variance of theta <= 0");
  const double var_zeta = 4.0 * mean_distance;

  Hyperparameters h;
  h.K = K;
  h.theta0 = theta0;
  h.a_sigma = h.a_zeta = h.a_theta = h.a_kappa = 3.0;
  // var(u_ijk) = 1/9 split over sigma2, kappa2 and nu.
  h.b_sigma = h.b_kappa = 2.0 / 27.0;
  h.v2_nu = 1.0 / 27.0;
  h.b_theta = var_theta;
  h.v2_theta = var_theta / 2.0;
  h.b_zeta = var_zeta;
  h.v2_zeta = var_zeta / 2.0;
  h.m_zeta = h.m_theta = 0.0;
  h.m_nu = Eigen::VectorXd::Zero(K);
  return h;
}

ElicitationRow elicitation_row(const Hyperparameters& h) {
  const auto d = latent_distance_moments(h.K);
  return {h.K,
          d.mean,
          d.sd,
          h.b_zeta,
          h.b_theta,
          h.b_sigma,
          h.b_kappa,
          std::sqrt(h.v2_zeta),
          std::sqrt(h.v2_theta),
          std::sqrt(h.v2_nu)};
}

ParameterState ParameterState::zeros(int I, int J, int K, Variant variant) {
  ParameterState s;
  s.zeta = Eigen::VectorXd::Zero(J);
  s.theta = Eigen::VectorXd::Zero(J);
  s.u.assign(variant == Variant::gmlpm ? 1 : J, Eigen::MatrixXd::Zero(I, K));
  s.eta = Eigen::MatrixXd::Zero(I, K);
  s.nu = Eigen::VectorXd::Zero(K);
  if (variant == Variant::iflpm) {
    s.sigma2 = s.kappa2 = IndependentPrior::sigma2;
    s.tau2_zeta = IndependentPrior::tau2_zeta;
    s.tau2_theta = IndependentPrior::tau2_theta;
  }
  return s;
}

bool operator==(const ParameterState& a, const ParameterState& b) {
  auto same = [](const auto& x, const auto& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  if (a.u.size() != b.u.size()) return false;
  for (std::size_t l = 0; l < a.u.size(); ++l)
    if (!same(a.u[l], b.u[l])) return false;
  return same(a.zeta, b.zeta) && same(a.theta, b.theta) && same(a.eta, b.eta) &&
         same(a.nu, b.nu) && a.sigma2 == b.sigma2 && a.mu_zeta == b.mu_zeta &&
         a.tau2_zeta == b.tau2_zeta && a.mu_theta == b.mu_theta && a.tau2_theta == b.tau2_theta &&
         a.kappa2 == b.kappa2;
}

long parameter_count(int I, int J, int K) {
  return static_cast<long>(I) * K * (J + 1) + 2L * J + K + 6;
}

namespace {

void check_layout(const ParameterState& s, Variant variant) {
  const int expected = variant == Variant::gmlpm ? 1 : s.n_layers();
  if (s.position_layers() != expected)
    throw std::invalid_argument("state layout does not match variant " + to_string(variant));
}

}  // namespace

double interaction_probability(const ParameterState& s, Variant variant, int i, int ip, int j) {
  if (i == ip) throw std::invalid_argument("interaction probability undefined for i == i'");
  check_layout(s, variant);
  return std_normal_cdf(probit_linear(s.zeta[j], s.theta[j], row_distance(s.positions(j), i, ip)));
}

double layer_log_likelihood(const ParameterState& s, const MultilayerNetwork& net, int j) {
  const auto& pos = s.positions(j);
  const double zeta = s.zeta[j];
  const double scale = std::exp(s.theta[j]);
  const int n = net.n_actors();
  double ll = 0.0;
  for (int i = 0; i < n; ++i)
    for (int ip = i + 1; ip < n; ++ip)
      if (net.observed(i, ip, j))
        ll += bernoulli_probit_log(net.edge(i, ip, j), zeta - scale * row_distance(pos, i, ip));
  return ll;
}

double log_likelihood(const ParameterState& s, Variant variant, const MultilayerNetwork& net) {
  check_layout(s, variant);
  if (s.n_layers() != net.n_layers() || s.n_actors() != net.n_actors())
    throw std::invalid_argument("state dimensions do not match the network");
  double ll = 0.0;
  for (int j = 0; j < net.n_layers(); ++j) ll += layer_log_likelihood(s, net, j);
  return ll;
}

namespace {

double isotropic_log_density(const Eigen::MatrixXd& x, const Eigen::MatrixXd& mean, double variance) {
  const double n = static_cast<double>(x.size());
  return -0.5 * (n * std::log(2.0 * M_PI * variance) + (x - mean).squaredNorm() / variance);
}

double rows_around(const Eigen::MatrixXd& x, const Eigen::VectorXd& center, double variance) {
  return isotropic_log_density(x, center.transpose().replicate(x.rows(), 1), variance);
}

}  // namespace

PriorTerms log_prior_terms(const ParameterState& s, Variant variant, const Hyperparameters& h) {
  check_layout(s, variant);
  for (double v : {s.sigma2, s.tau2_zeta, s.tau2_theta, s.kappa2})
    if (!(v > 0.0)) throw std::invalid_argument("state holds a nonpositive variance");

  PriorTerms t;
  const int J = s.n_layers();
  if (variant == Variant::iflpm) {
    for (int j = 0; j < J; ++j) {
      t.positions += isotropic_log_density(s.u[j], Eigen::MatrixXd::Zero(s.n_actors(), s.dim()),
                                           IndependentPrior::sigma2);
      t.layer_effects += normal_log_density(s.zeta[j], 0.0, IndependentPrior::tau2_zeta) +
                         normal_log_density(s.theta[j], 0.0, IndependentPrior::tau2_theta);
    }
    return t;
  }

  for (int j = 0; j < J; ++j)
    t.layer_effects += normal_log_density(s.zeta[j], s.mu_zeta, s.tau2_zeta) +
                       normal_log_density(s.theta[j], s.mu_theta, s.tau2_theta);
  t.hyper += normal_log_density(s.mu_theta, h.m_theta, h.v2_theta) +
             inverse_gamma_log_density(s.tau2_theta, h.a_theta, h.b_theta) +
             normal_log_density(s.mu_zeta, h.m_zeta, h.v2_zeta) +
             inverse_gamma_log_density(s.tau2_zeta, h.a_zeta, h.b_zeta) +
             isotropic_log_density(s.nu, h.m_nu, h.v2_nu) +
             inverse_gamma_log_density(s.kappa2, h.a_kappa, h.b_kappa);

  if (variant == Variant::gmlpm) {
    t.positions = rows_around(s.u[0], s.nu, s.kappa2);
    return t;
  }
  for (int j = 0; j < J; ++j) t.positions += isotropic_log_density(s.u[j], s.eta, s.sigma2);
  t.averages = rows_around(s.eta, s.nu, s.kappa2);
  t.hyper += inverse_gamma_log_density(s.sigma2, h.a_sigma, h.b_sigma);
  return t;
}

double log_prior(const ParameterState& s, Variant variant, const Hyperparameters& h) {
  return log_prior_terms(s, variant, h).total();
}

namespace {

Eigen::MatrixXd gaussian_rows(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = rng.normal();
  return m;
}

}  // namespace

ParameterState sample_prior(const Hyperparameters& h, int I, int J, Variant variant, Rng& rng) {
  h.check();
  const int K = h.K;
  ParameterState s = ParameterState::zeros(I, J, K, variant);

  if (variant == Variant::iflpm) {
    for (int j = 0; j < J; ++j) {
      s.zeta[j] = rng.normal(0.0, std::sqrt(IndependentPrior::tau2_zeta));
      s.theta[j] = rng.normal(0.0, std::sqrt(IndependentPrior::tau2_theta));
    }
    for (int j = 0; j < J; ++j)
      s.u[j] = std::sqrt(IndependentPrior::sigma2) * gaussian_rows(I, K, rng);
    return s;
  }

  s.sigma2 = rng.inverse_gamma(h.a_sigma, h.b_sigma);
  s.tau2_zeta = rng.inverse_gamma(h.a_zeta, h.b_zeta);
  s.tau2_theta = rng.inverse_gamma(h.a_theta, h.b_theta);
  s.kappa2 = rng.inverse_gamma(h.a_kappa, h.b_kappa);
  s.mu_zeta = rng.normal(h.m_zeta, std::sqrt(h.v2_zeta));
  s.mu_theta = rng.normal(h.m_theta, std::sqrt(h.v2_theta));
  for (int k = 0; k < K; ++k) s.nu[k] = rng.normal(h.m_nu[k], std::sqrt(h.v2_nu));
  for (int j = 0; j < J; ++j) {
    s.zeta[j] = rng.normal(s.mu_zeta, std::sqrt(s.tau2_zeta));
    s.theta[j] = rng.normal(s.mu_theta, std::sqrt(s.tau2_theta));
  }
  const Eigen::MatrixXd centers = s.nu.transpose().replicate(I, 1);
  s.eta = centers + std::sqrt(s.kappa2) * gaussian_rows(I, K, rng);

  if (variant == Variant::gmlpm) {
    s.u[0] = s.eta;
    s.sigma2 = h.b_sigma / (h.a_sigma - 1.0);
    return s;
  }
  for (int j = 0; j < J; ++j) s.u[j] = s.eta + std::sqrt(s.sigma2) * gaussian_rows(I, K, rng);
  return s;
}

ParameterState sample_prior(const Hyperparameters& h, int I, int J, Variant variant,
                            std::uint64_t seed) {
  Rng rng(seed);
  return sample_prior(h, I, J, variant, rng);
}

std::vector<double> prior_predictive_probabilities(const Hyperparameters& h, int n_draws,
                                                   std::uint64_t seed) {
  if (n_draws < 1) throw std::invalid_argument("n_draws must be >= 1");
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(n_draws);
  for (int b = 0; b < n_draws; ++b) {
    const auto s = sample_prior(h, 2, 1, Variant::mnlpm, rng);
    out.push_back(interaction_probability(s, Variant::mnlpm, 0, 1, 0));
  }
  return out;
}

}  // namespace mnlpm
