#include <functional>

#include "mnlpm/model.hpp"
#include "mnlpm/sampler.hpp"
#include "test_support.hpp"

using namespace mnlpm;

namespace {

constexpr int kDraws = 100000;
constexpr int I = 5, J = 6, K = 2;

struct Frozen {
  Hyperparameters h = elicit(K, 0.1);
  ParameterState s;
  Frozen() {
    Rng rng(31);
    s = sample_prior(h, I, J, Variant::mnlpm, rng);
    // Move away from the prior so the data terms matter.
    s.nu << 0.2, -0.1;
    s.kappa2 = 0.05;
    s.sigma2 = 0.08;
    s.mu_zeta = 1.1;
    s.mu_theta = 0.4;
    s.tau2_zeta = 0.7;
    s.tau2_theta = 0.3;
  }
};

std::vector<double> draws(ParameterState s, const std::function<void(ParameterState&, Rng&)>& step,
                          const std::function<double(const ParameterState&)>& read, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(kDraws);
  const ParameterState frozen = s;
  for (auto& x : out) {
    s = frozen;
    step(s, rng);
    x = read(s);
  }
  return out;
}

double sum_sq(const Eigen::MatrixXd& a) { return a.squaredNorm(); }

}  // namespace

TEST_SUITE("gibbs") {

TEST_CASE("step 2: eta given the rest") {
  Frozen f;
  const auto& s = f.s;
  for (int i : {0, 3})
    for (int k = 0; k < K; ++k) {
      double sum = 0;
      for (int j = 0; j < J; ++j) sum += s.u[j](i, k);
      const double prec = 1 / s.kappa2 + J / s.sigma2;
      const double mean = (s.nu[k] / s.kappa2 + sum / s.sigma2) / prec;
      const auto x = draws(s, [](ParameterState& t, Rng& r) { gibbs_eta(t, r); },
                           [&](const ParameterState& t) { return t.eta(i, k); }, 100 + i * 10 + k);
      test::check_moments(x, mean, 1 / prec);
    }
}

TEST_CASE("step 2 limits") {
  Frozen f;
  auto s = f.s;
  s.sigma2 = 1e12;
  CHECK((eta_conditional(s, 1).mean - s.nu).norm() < 1e-9);
  s = f.s;
  s.kappa2 = 1e12;
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(K);
  for (int j = 0; j < J; ++j) avg += s.u[j].row(1).transpose() / J;
  CHECK((eta_conditional(s, 1).mean - avg).norm() < 1e-9);
}

TEST_CASE("step 3: sigma2 given the rest") {
  Frozen f;
  const auto& s = f.s;
  double ss = 0;
  for (int j = 0; j < J; ++j) ss += sum_sq(s.u[j] - s.eta);
  const double shape = f.h.a_sigma + I * J * K / 2.0, rate = f.h.b_sigma + ss / 2;
  const auto x = draws(s, [&](ParameterState& t, Rng& r) { gibbs_sigma2(t, f.h, r); },
                       [](const ParameterState& t) { return t.sigma2; }, 3);
  test::check_moments(x, test::ig_mean(shape, rate), test::ig_var(shape, rate));

  auto flat = s;
  for (auto& u : flat.u) u = flat.eta;
  const auto c = sigma2_conditional(flat, f.h);
  CHECK(c.shape == f.h.a_sigma + I * J * K / 2.0);
  CHECK(c.rate == f.h.b_sigma);

  Rng r1(5), r2(5);
  auto a = s, b = s;
  gibbs_sigma2(a, f.h, r1);
  gibbs_sigma2(b, f.h, r2);
  CHECK(a.sigma2 == b.sigma2);
}

TEST_CASE("step 4: nu given the rest") {
  Frozen f;
  const auto& s = f.s;
  for (auto v : {Variant::mnlpm, Variant::gmlpm}) {
    auto t0 = s;
    if (v == Variant::gmlpm) t0.u.assign(1, s.eta + 0.1 * Eigen::MatrixXd::Ones(I, K));
    const Eigen::MatrixXd& avg = v == Variant::gmlpm ? t0.u[0] : t0.eta;
    for (int k = 0; k < K; ++k) {
      const double prec = 1 / f.h.v2_nu + I / t0.kappa2;
      const double mean = (f.h.m_nu[k] / f.h.v2_nu + avg.col(k).sum() / t0.kappa2) / prec;
      const auto x = draws(t0, [&](ParameterState& t, Rng& r) { gibbs_nu(t, f.h, r, v); },
                           [&](const ParameterState& t) { return t.nu[k]; }, 40 + k);
      test::check_moments(x, mean, 1 / prec);
    }
  }
  auto h = f.h;
  h.v2_nu = 1e12;
  const Eigen::VectorXd avg = s.eta.colwise().mean().transpose();
  CHECK((nu_conditional(s, h).mean - avg).norm() < 1e-9);
}

TEST_CASE("step 5: kappa2 given the rest") {
  Frozen f;
  const auto& s = f.s;
  const double ss = sum_sq(s.eta.rowwise() - s.nu.transpose());
  const double shape = f.h.a_kappa + I * K / 2.0, rate = f.h.b_kappa + ss / 2;
  const auto x = draws(s, [&](ParameterState& t, Rng& r) { gibbs_kappa2(t, f.h, r); },
                       [](const ParameterState& t) { return t.kappa2; }, 5);
  test::check_moments(x, test::ig_mean(shape, rate), test::ig_var(shape, rate));

  auto flat = s;
  flat.eta = flat.nu.transpose().replicate(I, 1);
  const auto c = kappa2_conditional(flat, f.h);
  CHECK(c.shape == f.h.a_kappa + I * K / 2.0);
  CHECK(c.rate == doctest::Approx(f.h.b_kappa).epsilon(1e-15));

  auto g = s;
  g.u.assign(1, s.eta * 2.0);
  const double gss = sum_sq(g.u[0].rowwise() - g.nu.transpose());
  CHECK(kappa2_conditional(g, f.h, Variant::gmlpm).rate == doctest::Approx(f.h.b_kappa + gss / 2));
}

TEST_CASE("steps 7 and 10: layer-effect means") {
  Frozen f;
  const auto& s = f.s;
  for (auto block : {EffectBlock::theta, EffectBlock::zeta}) {
    const bool z = block == EffectBlock::zeta;
    const Eigen::VectorXd& x = z ? s.zeta : s.theta;
    const double v2 = z ? f.h.v2_zeta : f.h.v2_theta, m = z ? f.h.m_zeta : f.h.m_theta;
    const double tau2 = z ? s.tau2_zeta : s.tau2_theta;
    const double prec = 1 / v2 + J / tau2;
    const double mean = (m / v2 + x.sum() / tau2) / prec;
    const auto d = draws(s, [&](ParameterState& t, Rng& r) { gibbs_mu(block, t, f.h, r); },
                         [&](const ParameterState& t) { return z ? t.mu_zeta : t.mu_theta; }, z ? 10 : 7);
    test::check_moments(d, mean, 1 / prec);
  }
  auto t = s;
  t.zeta.setConstant(f.h.m_zeta);
  CHECK(mu_conditional(EffectBlock::zeta, t, f.h).mean == doctest::Approx(f.h.m_zeta));
}

TEST_CASE("steps 8 and 11: layer-effect variances") {
  Frozen f;
  const auto& s = f.s;
  for (auto block : {EffectBlock::theta, EffectBlock::zeta}) {
    const bool z = block == EffectBlock::zeta;
    const Eigen::VectorXd& x = z ? s.zeta : s.theta;
    const double mu = z ? s.mu_zeta : s.mu_theta;
    const double a = z ? f.h.a_zeta : f.h.a_theta, b = z ? f.h.b_zeta : f.h.b_theta;
    const double shape = a + J / 2.0, rate = b + (x.array() - mu).square().sum() / 2;
    const auto d = draws(s, [&](ParameterState& t, Rng& r) { gibbs_tau2(block, t, f.h, r); },
                         [&](const ParameterState& t) { return z ? t.tau2_zeta : t.tau2_theta; }, z ? 11 : 8);
    test::check_moments(d, test::ig_mean(shape, rate), test::ig_var(shape, rate));
  }
  auto t = s;
  t.theta.setConstant(t.mu_theta);
  CHECK(tau2_conditional(EffectBlock::theta, t, f.h).rate == f.h.b_theta);
}

TEST_CASE("mean then variance in one call") {
  Frozen f;
  Rng r1(2), r2(2);
  auto a = f.s, b = f.s;
  gibbs_mu_tau(EffectBlock::zeta, a, f.h, r1);
  gibbs_mu(EffectBlock::zeta, b, f.h, r2);
  gibbs_tau2(EffectBlock::zeta, b, f.h, r2);
  CHECK(a == b);
}

}  // TEST_SUITE
