#pragma once

#include <cmath>
#include <vector>

#include "mnlpm/model.hpp"
#include "mnlpm/normal.hpp"

namespace mnlpm::test {

/// Dense-grid posterior for one observed dyad (2 actors, 1 layer, K = 1).
/// The likelihood depends on the positions only through delta = u_1 - u_2,
/// so the grid runs over (zeta, theta, delta) with marginal priors obtained
/// by integrating the variance hyperparameters out numerically.
struct ToyQuadrature {
  double mean_probability = 0;
  double mean_zeta = 0;
  std::vector<double> zeta_grid;
  std::vector<double> zeta_cdf;

  double cdf(double z) const {
    if (z <= zeta_grid.front()) return 0;
    if (z >= zeta_grid.back()) return 1;
    const double h = zeta_grid[1] - zeta_grid[0];
    const double pos = (z - zeta_grid.front()) / h;
    const auto k = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(k);
    return (1 - w) * zeta_cdf[k] + w * zeta_cdf[k + 1];
  }
};

namespace toy_detail {

inline double gauss(double x, double var) { return std::exp(-0.5 * x * x / var) / std::sqrt(2 * M_PI * var); }

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int t = 0; t < n; ++t) g[t] = lo + (hi - lo) * (t + 0.5) / n;
  return g;
}

/// Weights w_t of a log-spaced grid x_t so that sum_t w_t f(x_t) ~ E f(X), X ~ IG(a, b).
inline void inverse_gamma_rule(double a, double b, std::vector<double>& x, std::vector<double>& w) {
  const auto s = linspace(-14, 8, 2200);
  const double h = s[1] - s[0];
  x.resize(s.size());
  w.resize(s.size());
  double total = 0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    x[t] = std::exp(s[t]);
    w[t] = std::exp(inverse_gamma_log_density(x[t], a, b)) * x[t] * h;
    total += w[t];
  }
  for (double& v : w) v /= total;
}

/// Density of a N(m, v2 + tau2) mixture with tau2 ~ IG(a, b).
inline std::vector<double> effect_prior(const std::vector<double>& grid, double m, double v2, double a, double b) {
  std::vector<double> x, w, out(grid.size(), 0.0);
  inverse_gamma_rule(a, b, x, w);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t t = 0; t < x.size(); ++t) out[g] += w[t] * gauss(grid[g] - m, v2 + x[t]);
  return out;
}

}  // namespace toy_detail

/// Posterior on the toy problem with y_12 = 1 under MNLPM or IFLPM priors.
inline ToyQuadrature toy_quadrature(const Hyperparameters& h, Variant variant) {
  using namespace toy_detail;
  const int nz = 600, nt = 600, nd = 300;
  const auto zeta = linspace(-14, 14, nz);
  const auto theta = linspace(-14, 14, nt);
  const auto delta = linspace(0, 5, nd);  // |u_1 - u_2|, density doubled

  std::vector<double> pz(nz), pt(nt), pd(nd, 0.0);
  if (variant == Variant::iflpm) {
    for (int g = 0; g < nz; ++g) pz[g] = gauss(zeta[g], IndependentPrior::tau2_zeta);
    for (int g = 0; g < nt; ++g) pt[g] = gauss(theta[g], IndependentPrior::tau2_theta);
    for (int g = 0; g < nd; ++g) pd[g] = 2 * gauss(delta[g], 2 * IndependentPrior::sigma2);
  } else {
    pz = effect_prior(zeta, h.m_zeta, h.v2_zeta, h.a_zeta, h.b_zeta);
    pt = effect_prior(theta, h.m_theta, h.v2_theta, h.a_theta, h.b_theta);
    // delta | sigma2, kappa2 ~ N(0, 2 (sigma2 + kappa2)); nu cancels.
    std::vector<double> xs, ws, xk, wk;
    inverse_gamma_rule(h.a_sigma, h.b_sigma, xs, ws);
    inverse_gamma_rule(h.a_kappa, h.b_kappa, xk, wk);
    std::vector<double> sx, sw;
    for (std::size_t p = 0; p < xs.size(); p += 4)
      for (std::size_t q = 0; q < xk.size(); q += 4) {
        sx.push_back(2 * (xs[p] + xk[q]));
        sw.push_back(ws[p] * wk[q]);
      }
    double total = 0;
    for (double w : sw) total += w;
    for (int g = 0; g < nd; ++g) {
      for (std::size_t t = 0; t < sx.size(); ++t) pd[g] += sw[t] * 2 * gauss(delta[g], sx[t]);
      pd[g] /= total;
    }
  }

  ToyQuadrature out;
  out.zeta_grid = zeta;
  std::vector<double> zeta_mass(nz, 0.0);
  double Z = 0, P = 0;
  for (int a = 0; a < nz; ++a) {
    double row = 0, row_p = 0;
    for (int b = 0; b < nt; ++b) {
      const double scale = std::exp(theta[b]);
      double cell = 0, cell_p = 0;
      for (int c = 0; c < nd; ++c) {
        const double p = std_normal_cdf(zeta[a] - scale * delta[c]);
        cell += pd[c] * p;  // posterior weight: prior x likelihood, y = 1
        cell_p += pd[c] * p * p;
      }
      row += pt[b] * cell;
      row_p += pt[b] * cell_p;
    }
    zeta_mass[a] = pz[a] * row;
    Z += zeta_mass[a];
    P += pz[a] * row_p;
    out.mean_zeta += zeta[a] * zeta_mass[a];
  }
  out.mean_zeta /= Z;
  out.mean_probability = P / Z;
  out.zeta_cdf.resize(nz);
  double acc = 0;
  for (int a = 0; a < nz; ++a) {
    acc += zeta_mass[a] / Z;
    out.zeta_cdf[a] = acc;
  }
  return out;
}

}  // namespace mnlpm::test
