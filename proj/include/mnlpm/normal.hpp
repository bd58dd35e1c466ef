#pragma once

namespace mnlpm {

/// Standard Gaussian cumulative distribution function.
double std_normal_cdf(double x);

/// Inverse of std_normal_cdf. Throws std::domain_error unless 0 < p < 1.
double std_normal_quantile(double p);

/// Smallest and largest interaction probability used inside log-densities.
inline constexpr double kProbabilityFloor = 1e-12;

/// log Ber(y | Phi(x)) with both Phi(x) and 1 - Phi(x) clamped to
/// [kProbabilityFloor, 1 - kProbabilityFloor].
double bernoulli_probit_log(bool y, double x);

/// log N(x | mean, variance), scalar.
double normal_log_density(double x, double mean, double variance);

/// log IG(x | shape, rate) with density rate^a / Gamma(a) x^(-a-1) exp(-rate/x).
double inverse_gamma_log_density(double x, double shape, double rate);

}  // namespace mnlpm
