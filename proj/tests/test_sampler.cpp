#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "mnlpm/sampler.hpp"
#include "test_support.hpp"
#include "toy_oracle.hpp"

using namespace mnlpm;

namespace {

FitConfig quick(Variant v, int K, std::uint64_t seed = 1) {
  FitConfig c;
  c.variant = v;
  c.K = K;
  c.n_burn = 500;
  c.n_thin = 2;
  c.n_keep = 100;
  c.seed = seed;
  return c;
}

double brute_posterior(const ParameterState& s, Variant v, const Hyperparameters& h, const MultilayerNetwork& net) {
  return log_likelihood(s, v, net) + log_prior(s, v, h);
}

MultilayerNetwork one_edge() {
  MultilayerNetwork net(2, 1);
  net.set_edge(0, 1, 0, true);
  return net;
}

/// Kolmogorov-Smirnov distance between the sample and a reference cdf.
double ks_distance(std::vector<double> x, const test::ToyQuadrature& q) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double F = q.cdf(x[t]);
    d = std::max({d, std::abs((t + 1) / n - F), std::abs(t / n - F)});
  }
  return d;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("fit configuration defaults, checks and JSON") {
  FitConfig c;
  CHECK(c.n_burn == 100000);
  CHECK(c.n_thin == 10);
  CHECK(c.n_keep == 10000);
  CHECK(c.total_iterations() == 200000);
  CHECK(c.adapt.target_accept == 0.35);
  CHECK(c.adapt.adapt_rate_decay == 0.8);
  CHECK(c.adapt.initial_log_step == doctest::Approx(std::log(0.1)));
  CHECK(c.adapt.freeze_after_burnin);
  const nlohmann::json j = quick(Variant::gmlpm, 3, 99);
  CHECK(j.get<FitConfig>() == quick(Variant::gmlpm, 3, 99));
  CHECK(j["variant"] == "GMLPM");

  auto bad = c;
  bad.n_thin = 0;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
  bad = c;
  bad.n_burn = -1;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
  bad = c;
  bad.n_keep = 0;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
  bad = c;
  bad.adapt.target_accept = 1.0;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
  bad = c;
  bad.adapt.adapt_rate_decay = 0.5;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}

TEST_CASE("a zero log ratio is always accepted without consuming randomness") {
  Rng a(3), b(3);
  for (int t = 0; t < 1000; ++t) REQUIRE(metropolis_accept(0.0, a));
  CHECK(a() == b());
  int accepted = 0;
  for (int t = 0; t < 100000; ++t) accepted += metropolis_accept(std::log(0.3), a);
  CHECK(accepted / 100000.0 == doctest::Approx(0.3).epsilon(0.02));
}

TEST_CASE("adaptation moves the step toward the target rate") {
  AdaptConfig cfg;
  BlockAdapter a;
  a.log_step = 0;
  a.adapt(true, cfg);
  CHECK(a.log_step == doctest::Approx(0.65));
  a.adapt(false, cfg);
  CHECK(a.log_step == doctest::Approx(0.65 - std::pow(2.0, -0.8) * 0.35));
  CHECK(a.n_adapt == 2);
}

TEST_CASE("full-conditional differences match brute-force posterior differences") {
  const auto net = test::wiring();
  const auto h = elicit(2);
  Rng rng(17);
  for (auto v : {Variant::mnlpm, Variant::iflpm, Variant::gmlpm}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto s = sample_prior(h, 14, 4, v, rng);
      const int i = static_cast<int>(rng.uniform() * 14);
      const int j = static_cast<int>(rng.uniform() * 4);
      const int l = v == Variant::gmlpm ? 0 : j;

      auto t = s;
      t.u[l].row(i) += 0.3 * test::random_matrix(1, 2, rng);
      if (v == Variant::gmlpm) t.eta = t.u[0];
      double want = brute_posterior(t, v, h, net) - brute_posterior(s, v, h, net);
      double got = log_full_conditional_u(t, v, net, i, j) - log_full_conditional_u(s, v, net, i, j);
      CHECK(std::abs(got - want) < 1e-10);

      t = s;
      t.zeta[j] += 0.4 * rng.normal();
      want = brute_posterior(t, v, h, net) - brute_posterior(s, v, h, net);
      got = log_full_conditional_zeta(t, v, net, j) - log_full_conditional_zeta(s, v, net, j);
      CHECK(std::abs(got - want) < 1e-10);

      t = s;
      t.theta[j] += 0.4 * rng.normal();
      want = brute_posterior(t, v, h, net) - brute_posterior(s, v, h, net);
      got = log_full_conditional_theta(t, v, net, j) - log_full_conditional_theta(s, v, net, j);
      CHECK(std::abs(got - want) < 1e-10);
    }
  }
}

TEST_CASE("retention counts, stored log-likelihoods and positive variances") {
  const auto net = test::wiring();
  for (auto v : {Variant::mnlpm, Variant::iflpm, Variant::gmlpm}) {
    const auto samples = run_mcmc(net, elicit(2), quick(v, 2));
    REQUIRE(samples.size() == 100);
    REQUIRE(samples.loglik.size() == 100);
    for (int b = 0; b < samples.size(); ++b) {
      const auto& s = samples.states[b];
      CHECK(samples.iterations[b] == 500 + 2 * (b + 1));
      CHECK(samples.loglik[b] == log_likelihood(s, v, net));
      CHECK(std::isfinite(samples.loglik[b]));
      for (double x : {s.sigma2, s.kappa2, s.tau2_zeta, s.tau2_theta}) CHECK(x > 0);
      if (v == Variant::gmlpm) CHECK(s.eta == s.u[0]);
      if (v == Variant::iflpm) {
        CHECK(s.sigma2 == IndependentPrior::sigma2);
        CHECK(s.tau2_zeta == IndependentPrior::tau2_zeta);
      }
    }
    const std::size_t blocks = (v == Variant::gmlpm ? 14 : 56) + 8;
    CHECK(samples.acceptance.size() == blocks);
  }

  FitConfig one = quick(Variant::mnlpm, 2);
  one.n_keep = 1;
  one.n_burn = 0;
  one.n_thin = 1;
  CHECK(run_mcmc(net, elicit(2), one).size() == 1);
  CHECK_THROWS_AS(run_mcmc(net, elicit(3), quick(Variant::mnlpm, 2)), std::invalid_argument);
}

TEST_CASE("same seed gives identical chains, other seeds differ") {
  const auto net = test::wiring();
  const auto a = run_mcmc(net, elicit(2), quick(Variant::mnlpm, 2, 5));
  const auto b = run_mcmc(net, elicit(2), quick(Variant::mnlpm, 2, 5));
  const auto c = run_mcmc(net, elicit(2), quick(Variant::mnlpm, 2, 6));
  CHECK(a.states == b.states);
  CHECK(a.loglik == b.loglik);
  CHECK_FALSE(a.states == c.states);
}

TEST_CASE("running in pieces equals running straight through") {
  const auto net = test::wiring();
  const auto cfg = quick(Variant::mnlpm, 2, 8);
  Chain whole(net, elicit(2), cfg);
  whole.run();
  Chain first(net, elicit(2), cfg);
  first.run(337);
  Chain second(net, first.snapshot());
  second.run(601);
  Chain third(net, second.snapshot());
  third.run();
  CHECK(third.done());
  const auto x = whole.take_samples(), y = third.take_samples();
  CHECK(x.states == y.states);
  CHECK(x.loglik == y.loglik);
  CHECK(x.acceptance.size() == y.acceptance.size());
  for (std::size_t t = 0; t < x.acceptance.size(); ++t) CHECK(x.acceptance[t].accepted == y.acceptance[t].accepted);
}

TEST_CASE("checkpoint hook fires at multiples of the interval and does not perturb the chain") {
  const auto net = test::wiring();
  const auto cfg = quick(Variant::iflpm, 2, 2);
  std::vector<long> at;
  RunHooks hooks;
  hooks.checkpoint_every = 200;
  hooks.on_checkpoint = [&](const ChainSnapshot& s) { at.push_back(s.iteration); };
  const auto a = run_mcmc(net, elicit(2), cfg, hooks);
  CHECK(at == std::vector<long>{200, 400, 600});
  CHECK(a.states == run_mcmc(net, elicit(2), cfg).states);
}

TEST_CASE("step sizes freeze after burn-in") {
  const auto net = test::wiring();
  auto cfg = quick(Variant::mnlpm, 2, 4);
  Chain chain(net, elicit(2), cfg);
  chain.run(cfg.n_burn);
  std::vector<double> steps;
  for (const auto& a : chain.adapters()) steps.push_back(a.log_step);
  chain.run();
  for (std::size_t t = 0; t < steps.size(); ++t) CHECK(chain.adapters()[t].log_step == steps[t]);
  for (const auto& a : chain.adapters()) CHECK(a.proposed == cfg.n_thin * cfg.n_keep);

  cfg.adapt.freeze_after_burnin = false;
  Chain moving(net, elicit(2), cfg);
  moving.run(cfg.n_burn);
  const double before = moving.adapters().front().log_step;
  moving.run();
  CHECK(moving.adapters().front().log_step != before);
}

TEST_CASE("acceptance rates after burn-in on the wiring data") {
  const auto net = test::wiring();
  FitConfig cfg = quick(Variant::mnlpm, 3, 1);
  cfg.n_burn = 5000;
  cfg.n_thin = 5;
  cfg.n_keep = 400;
  const auto samples = run_mcmc(net, elicit(3), cfg);
  for (const auto& a : samples.acceptance) {
    INFO(a.block);
    CHECK(a.proposed == 2000);
    CHECK(a.rate >= 0.20);
    CHECK(a.rate <= 0.50);
  }
}

TEST_CASE("effective sample size") {
  Rng rng(12);
  std::vector<double> iid(10000);
  for (auto& x : iid) x = rng.normal();
  const double e = effective_sample_size(iid);
  CHECK(e >= 9000);
  CHECK(e <= 10000);

  std::vector<double> ar(10000);
  double x = 0;
  for (int burn = 0; burn < 1000; ++burn) x = 0.9 * x + rng.normal();
  for (auto& v : ar) v = x = 0.9 * x + rng.normal();
  const double target = 10000 * 0.1 / 1.9;
  CHECK(std::abs(effective_sample_size(ar) - target) < 0.25 * target);

  CHECK(effective_sample_size(std::vector<double>(50, 3.0)) == 50);
  std::vector<double> alternating(100);
  for (int t = 0; t < 100; ++t) alternating[t] = t % 2 ? 1.0 : -1.0;
  const double alt = effective_sample_size(alternating);
  CHECK(alt > 0);
  CHECK(alt <= 100);
  CHECK_THROWS_AS(effective_sample_size(std::vector<double>(5, 1.0)), std::invalid_argument);
}

TEST_CASE("toy posterior matches dense-grid quadrature") {
  const auto net = one_edge();
  const auto h = elicit(1, 0.1);
  for (auto v : {Variant::iflpm, Variant::mnlpm}) {
    INFO(to_string(v));
    const auto q = test::toy_quadrature(h, v);
    FitConfig cfg;
    cfg.variant = v;
    cfg.K = 1;
    cfg.n_burn = 10000;
    cfg.n_thin = 10;
    cfg.n_keep = 50000;
    cfg.seed = 2;
    const auto samples = run_mcmc(net, h, cfg);
    std::vector<double> zeta, prob;
    for (const auto& s : samples.states) {
      zeta.push_back(s.zeta[0]);
      prob.push_back(interaction_probability(s, v, 0, 1, 0));
    }
    const double mz = std::accumulate(zeta.begin(), zeta.end(), 0.0) / zeta.size();
    const double mp = std::accumulate(prob.begin(), prob.end(), 0.0) / prob.size();
    CHECK(std::abs(mp - q.mean_probability) < 0.02);
    CHECK(std::abs(mz - q.mean_zeta) < 0.02);
    CHECK(ks_distance(zeta, q) < 0.05);
  }
}

TEST_CASE("parameter traces") {
  const auto samples = run_mcmc(test::wiring(), elicit(2), quick(Variant::mnlpm, 2));
  const auto t = parameter_trace(samples, [](const ParameterState& s) { return s.mu_zeta; });
  REQUIRE(t.size() == 100);
  CHECK(t[7] == samples.states[7].mu_zeta);
}

}  // TEST_SUITE
