#include "mnlpm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>

#include "mnlpm/parallel.hpp"

namespace mnlpm {

namespace {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

}  // namespace

WaicReport waic_from_pointwise(const Eigen::MatrixXd& log_density) {
  const Eigen::Index B = log_density.rows(), N = log_density.cols();
  if (B < 1) throw std::invalid_argument("waic needs at least one sample");
  WaicReport r;
  r.point_lppd.resize(static_cast<std::size_t>(N));
  r.point_p_waic.resize(static_cast<std::size_t>(N));
  CompensatedSum lppd, p;
  for (Eigen::Index n = 0; n < N; ++n) {
    const auto col = log_density.col(n);
    const double top = col.maxCoeff();
    CompensatedSum mass, mean;
    for (Eigen::Index b = 0; b < B; ++b) {
      mass.add(std::exp(col[b] - top));
      mean.add(col[b]);
    }
    const double log_mean_p = top + std::log(mass.value() / static_cast<double>(B));
    const double mean_log_p = mean.value() / static_cast<double>(B);
    r.point_lppd[n] = log_mean_p;
    r.point_p_waic[n] = 2.0 * (log_mean_p - mean_log_p);
    lppd.add(r.point_lppd[n]);
    p.add(r.point_p_waic[n]);
  }
  r.lppd = lppd.value();
  r.p_waic = p.value();
  r.waic = -2.0 * r.lppd + 2.0 * r.p_waic;
  return r;
}

Eigen::MatrixXd pointwise_log_density(const PosteriorSamples& samples, const MultilayerNetwork& net,
                                      std::vector<Triple>* points) {
  std::vector<Triple> obs;
  for (int j = 0; j < net.n_layers(); ++j)
    for (int i = 0; i < net.n_actors(); ++i)
      for (int ip = i + 1; ip < net.n_actors(); ++ip)
        if (net.observed(i, ip, j)) obs.push_back({i, ip, j});
  const long B = samples.size();
  Eigen::MatrixXd ld(B, static_cast<Eigen::Index>(obs.size()));
  for (long b = 0; b < B; ++b) {
    const auto& s = samples.states[b];
    if (s.n_actors() != net.n_actors() || s.n_layers() != net.n_layers())
      throw std::invalid_argument("samples do not match the network");
    for (std::size_t n = 0; n < obs.size(); ++n) {
      const auto [i, ip, j] = obs[n];
      ld(b, static_cast<Eigen::Index>(n)) = bernoulli_probit_log(
          net.edge(i, ip, j), probit_linear(s.zeta[j], s.theta[j], row_distance(s.positions(j), i, ip)));
    }
  }
  if (points) *points = std::move(obs);
  return ld;
}

WaicReport waic(const PosteriorSamples& samples, const MultilayerNetwork& net) {
  std::vector<Triple> points;
  const Eigen::MatrixXd ld = pointwise_log_density(samples, net, &points);
  WaicReport r = waic_from_pointwise(ld);
  r.points = std::move(points);
  return r;
}

WaicScan waic_scan(const MultilayerNetwork& net, Variant variant, const std::vector<int>& K_set,
                   const FitConfig& base, double theta0, int jobs,
                   const std::function<void(int, const PosteriorSamples&)>& on_fit) {
  std::vector<int> Ks = K_set;
  std::sort(Ks.begin(), Ks.end());
  Ks.erase(std::unique(Ks.begin(), Ks.end()), Ks.end());
  WaicScan scan;
  scan.rows.resize(Ks.size());
  parallel_for(static_cast<int>(Ks.size()), jobs, [&](int t) {
    WaicScanRow& row = scan.rows[static_cast<std::size_t>(t)];
    row.K = Ks[static_cast<std::size_t>(t)];
    try {
      FitConfig config = base;
      config.variant = variant;
      config.K = row.K;
      config.seed = derive_seed(base.seed, static_cast<std::uint64_t>(row.K));
      const auto samples = run_mcmc(net, elicit(row.K, theta0), config);
      const auto w = waic(samples, net);
      row.waic = w.waic;
      row.p_waic = w.p_waic;
      row.lppd = w.lppd;
      if (on_fit) on_fit(row.K, samples);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  double best = INFINITY;
  for (const auto& row : scan.rows)
    if (row.error.empty() && row.waic < best) {
      best = row.waic;
      scan.best_K = row.K;
    }
  return scan;
}

MultilayerNetwork replicate_network(const ParameterState& state, Variant variant,
                                    const MultilayerNetwork& shape, Rng& rng) {
  MultilayerNetwork out(shape.n_actors(), shape.n_layers());
  out.actors() = shape.actors();
  out.layer_labels() = shape.layer_labels();
  for (int j = 0; j < shape.n_layers(); ++j)
    for (int i = 0; i < shape.n_actors(); ++i)
      for (int ip = i + 1; ip < shape.n_actors(); ++ip)
        if (rng.bernoulli(interaction_probability(state, variant, i, ip, j))) out.set_edge(i, ip, j, true);
  return out;
}

std::string to_string(GraphStat s) {
  switch (s) {
    case GraphStat::density: return "density";
    case GraphStat::clustering_coefficient: return "clustering_coefficient";
    case GraphStat::assortativity: return "assortativity";
    case GraphStat::mean_geodesic: return "mean_geodesic";
    case GraphStat::mean_eigen_centrality: return "mean_eigen_centrality";
    case GraphStat::mean_degree: return "mean_degree";
  }
  return "?";
}

namespace {

double mean_geodesic(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  long pairs = 0;
  long total = 0;
  std::vector<int> dist(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w = 0; w < n; ++w)
        if (a(v, w) != 0.0 && dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
    }
    for (int t = s + 1; t < n; ++t)
      if (dist[t] > 0) {
        ++pairs;
        total += dist[t];
      }
  }
  return pairs > 0 ? static_cast<double>(total) / pairs : NAN;
}

double mean_eigen_centrality(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  if (a.sum() == 0.0) return NAN;
  // Power iteration on A + I: same eigenvectors, and the shift removes the
  // -lambda_max tie of bipartite graphs.
  const Eigen::MatrixXd shifted = a + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd y = shifted * x;
    y /= y.norm();
    const double change = (y - x).lpNorm<Eigen::Infinity>();
    x = std::move(y);
    if (change < 1e-10) break;
  }
  x /= x.maxCoeff();
  return x.mean();
}

}  // namespace

double graph_statistic(const BinaryMatrix& layer, GraphStat stat) {
  const Eigen::MatrixXd a = layer.cast<double>();
  const double n = static_cast<double>(a.rows());
  const Eigen::VectorXd degree = a.rowwise().sum();
  const double edges = degree.sum() / 2.0;
  switch (stat) {
    case GraphStat::density:
      return n > 1 ? edges / (n * (n - 1) / 2.0) : NAN;
    case GraphStat::mean_degree:
      return n > 0 ? 2.0 * edges / n : NAN;
    case GraphStat::clustering_coefficient: {
      const double closed = (a * a * a).trace();  // 6 x triangles
      const double triples = (degree.array() * (degree.array() - 1.0)).sum();  // 2 x connected triples
      return triples > 0 ? closed / triples : NAN;
    }
    case GraphStat::assortativity: {
      // Pearson correlation of degrees at the two ends of each edge, both orientations.
      double s1 = 0, s2 = 0, sxy = 0, m = 0;
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
          if (a(i, j) != 0.0) {
            s1 += degree[i];
            s2 += degree[i] * degree[i];
            sxy += degree[i] * degree[j];
            m += 1;
          }
      if (m == 0) return NAN;
      const double mean = s1 / m;
      const double var = s2 / m - mean * mean;
      if (!(var > 1e-12)) return NAN;
      return std::clamp((sxy / m - mean * mean) / var, -1.0, 1.0);
    }
    case GraphStat::mean_geodesic:
      return mean_geodesic(a);
    case GraphStat::mean_eigen_centrality:
      return mean_eigen_centrality(a);
  }
  return NAN;
}

PpcReport posterior_predictive_check(const PosteriorSamples& samples, const MultilayerNetwork& net,
                                     long n_replicates, std::uint64_t seed) {
  const long B = samples.size();
  if (B < 1) throw std::invalid_argument("posterior predictive check needs samples");
  if (n_replicates < 1 || n_replicates > B)
    throw std::invalid_argument("n_replicates must lie in [1, B]");
  const int J = net.n_layers();
  constexpr int S = static_cast<int>(std::size(kAllGraphStats));
  std::vector<std::vector<double>> values(static_cast<std::size_t>(J * S));
  Rng rng(seed);
  for (long r = 0; r < n_replicates; ++r) {
    const long b = r * B / n_replicates;
    const auto rep = replicate_network(samples.states[b], samples.variant(), net, rng);
    for (int j = 0; j < J; ++j)
      for (int s = 0; s < S; ++s) {
        const double v = graph_statistic(rep.layer(j), kAllGraphStats[s]);
        if (!std::isnan(v)) values[static_cast<std::size_t>(j * S + s)].push_back(v);
      }
  }
  PpcReport report;
  report.n_replicates = n_replicates;
  for (int j = 0; j < J; ++j)
    for (int s = 0; s < S; ++s) {
      PpcRow row;
      row.layer = j;
      row.stat = kAllGraphStats[s];
      row.observed = graph_statistic(net.layer(j), row.stat);
      auto& v = values[static_cast<std::size_t>(j * S + s)];
      row.valid = static_cast<long>(v.size());
      row.replicated = summarize(std::move(v));
      if (!std::isnan(row.observed) && row.valid > 0)
        row.contained = row.replicated.lo <= row.observed && row.observed <= row.replicated.hi;
      report.rows.push_back(row);
    }
  return report;
}

namespace {

/// Shifted by the first value so a constant segment returns that value exactly.
double mean_of(const std::vector<double>& x, std::size_t from, std::size_t to) {
  const double shift = x[from];
  double s = 0;
  for (std::size_t t = from; t < to; ++t) s += x[t] - shift;
  return shift + s / static_cast<double>(to - from);
}

double variance_of(const std::vector<double>& x, std::size_t from, std::size_t to) {
  const double m = mean_of(x, from, to);
  double s = 0;
  for (std::size_t t = from; t < to; ++t) s += (x[t] - m) * (x[t] - m);
  return to - from > 1 ? s / static_cast<double>(to - from - 1) : 0.0;
}

/// Variance of a segment mean, autocorrelation-corrected via its ESS.
double mean_variance(const std::vector<double>& x, std::size_t from, std::size_t to) {
  const double v = variance_of(x, from, to);
  if (!(v > 0.0)) return 0.0;
  const std::vector<double> seg(x.begin() + from, x.begin() + to);
  const double ess = seg.size() >= 10 ? effective_sample_size(seg) : static_cast<double>(seg.size());
  return v / ess;
}

}  // namespace

double geweke_z(const std::vector<double>& trace) {
  const std::size_t n = trace.size();
  if (n < 20) throw std::invalid_argument("geweke diagnostic needs at least 20 values");
  const std::size_t a_end = n / 10;
  const std::size_t b_start = n - n / 2;
  const double diff = mean_of(trace, 0, a_end) - mean_of(trace, b_start, n);
  const double var = mean_variance(trace, 0, a_end) + mean_variance(trace, b_start, n);
  if (!(var > 0.0)) return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
  return diff / std::sqrt(var);
}

std::vector<ConvergenceRow> convergence_report(const PosteriorSamples& samples) {
  using Getter = std::function<double(const ParameterState&)>;
  std::vector<std::string> names;
  std::vector<Getter> getters;
  auto add = [&](std::string name, Getter f) {
    names.push_back(std::move(name));
    getters.push_back(std::move(f));
  };
  const Variant v = samples.variant();
  if (v != Variant::iflpm) {
    add("mu_zeta", [](const ParameterState& s) { return s.mu_zeta; });
    add("tau2_zeta", [](const ParameterState& s) { return s.tau2_zeta; });
    add("mu_theta", [](const ParameterState& s) { return s.mu_theta; });
    add("tau2_theta", [](const ParameterState& s) { return s.tau2_theta; });
    if (v == Variant::mnlpm)
      add("sigma2", [](const ParameterState& s) { return s.sigma2; });
    add("kappa2", [](const ParameterState& s) { return s.kappa2; });
  }
  const int J = samples.states.empty() ? 0 : samples.states.front().n_layers();
  for (int j = 0; j < J; ++j)
    add("zeta[" + std::to_string(j + 1) + "]",
                        [j](const ParameterState& s) { return s.zeta[j]; });
  for (int j = 0; j < J; ++j)
    add("theta[" + std::to_string(j + 1) + "]",
                        [j](const ParameterState& s) { return s.theta[j]; });

  auto row_for = [&](std::string name, const std::vector<double>& trace) {
    ConvergenceRow r;
    r.parameter = std::move(name);
    const std::size_t n = trace.size();
    r.mean = mean_of(trace, 0, n);
    r.sd = std::sqrt(variance_of(trace, 0, n));
    if (n >= 10) r.ess = effective_sample_size(trace);
    if (n >= 100) r.geweke_z = geweke_z(trace);
    return r;
  };
  std::vector<ConvergenceRow> rows;
  for (std::size_t p = 0; p < names.size(); ++p)
    rows.push_back(row_for(names[p], parameter_trace(samples, getters[p])));
  rows.push_back(row_for("loglik", samples.loglik));
  return rows;
}

void write_waic_csv(std::ostream& out, const std::vector<WaicScanRow>& rows) {
  out << "K,waic,p_waic,lppd\n";
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      out << r.K << ",NA,NA,NA\n";
      continue;
    }
    out << r.K << ',' << r.waic << ',' << r.p_waic << ',' << r.lppd << '\n';
  }
}

void write_ppc_csv(std::ostream& out, const PpcReport& report,
                   const std::vector<std::string>& layer_labels) {
  out << "layer,statistic,observed,mean,lo,hi,contained\n";
  auto num = [&](double x) {
    if (std::isnan(x))
      out << "NA";
    else
      out << x;
  };
  for (const auto& r : report.rows) {
    out << (r.layer < static_cast<int>(layer_labels.size()) ? layer_labels[r.layer]
                                                            : std::to_string(r.layer + 1))
        << ',' << to_string(r.stat) << ',';
    num(r.observed);
    out << ',';
    num(r.replicated.point);
    out << ',';
    num(r.replicated.lo);
    out << ',';
    num(r.replicated.hi);
    out << ',' << (r.contained ? (*r.contained ? "1" : "0") : "NA") << '\n';
  }
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "parameter,ess,mean,sd,geweke_z\n";
  for (const auto& r : rows)
    out << r.parameter << ',' << r.ess << ',' << r.mean << ',' << r.sd << ',' << r.geweke_z << '\n';
}

}  // namespace mnlpm
