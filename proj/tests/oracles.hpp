#pragma once

#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "mnlpm/network.hpp"
#include "mnlpm/random.hpp"

namespace mnlpm::test {

inline std::filesystem::path wiring_path() { return std::filesystem::path(MNLPM_DATA_DIR) / "wiring.txt"; }

inline MultilayerNetwork wiring() { return load_network(wiring_path(), NetworkFormat::edge_list); }

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("mnlpm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Textbook Phi via the complementary error function.
inline double phi_oracle(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

struct Moments {
  double mean = 0;
  double var = 0;
  double m4 = 0;  // fourth central moment
  long n = 0;

  double se_mean() const { return std::sqrt(var / n); }
  double se_var() const { return std::sqrt(std::max(m4 - var * var, 0.0) / n); }
};

inline Moments moments(const std::vector<double>& x) {
  Moments m;
  m.n = static_cast<long>(x.size());
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / m.n;
  for (double v : x) {
    const double d = v - m.mean;
    m.var += d * d;
    m.m4 += d * d * d * d;
  }
  m.var /= m.n;
  m.m4 /= m.n;
  return m;
}

/// Standardized errors of the sample mean and variance against analytic values.
struct MomentCheck {
  double z_mean;
  double z_var;
  bool ok(double z = 4) const { return std::abs(z_mean) < z && std::abs(z_var) < z; }
};

inline MomentCheck moment_check(const std::vector<double>& draws, double mean, double var) {
  const Moments m = moments(draws);
  return {(m.mean - mean) / m.se_mean(), (m.var - var) / m.se_var()};
}

inline double ig_mean(double shape, double rate) { return rate / (shape - 1); }
inline double ig_var(double shape, double rate) {
  return rate * rate / ((shape - 1) * (shape - 1) * (shape - 2));
}

/// Random I x K matrix with iid standard normal entries.
inline Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = rng.normal();
  return m;
}

/// Random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(int K, Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(K, K, rng));
  return qr.householderQ();
}

}  // namespace mnlpm::test
