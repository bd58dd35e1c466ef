#include "mnlpm/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace mnlpm {

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

IntervalSummary summarize(std::vector<double> values) {
  IntervalSummary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.point = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.lo = std::min(quantile_sorted(values, 0.025), s.point);
  s.hi = std::max(quantile_sorted(values, 0.975), s.point);
  s.significant = s.lo > 0.0 || s.hi < 0.0;
  return s;
}

AlignedSamples align_samples(const PosteriorSamples& samples) {
  if (samples.states.empty()) throw std::invalid_argument("align_samples: no samples");
  AlignedSamples a;
  a.variant = samples.variant();
  const auto& ref = samples.states.front();
  const bool per_layer = a.variant == Variant::iflpm;
  const long B = samples.size();
  a.rotations.resize(B);
  a.u.resize(B);
  a.eta.resize(B);
  for (long b = 0; b < B; ++b) {
    const auto& s = samples.states[b];
    if (per_layer) {
      for (int l = 0; l < s.position_layers(); ++l) {
        const Eigen::MatrixXd q = procrustes_rotation(ref.u[l], s.u[l]);
        a.rotations[b].push_back(q);
        a.u[b].push_back(s.u[l] * q);
      }
      a.eta[b] = s.eta;
    } else {
      const Eigen::MatrixXd& anchor = a.variant == Variant::gmlpm ? ref.u[0] : ref.eta;
      const Eigen::MatrixXd& own = a.variant == Variant::gmlpm ? s.u[0] : s.eta;
      const Eigen::MatrixXd q = procrustes_rotation(anchor, own);
      a.rotations[b].push_back(q);
      for (const auto& ul : s.u) a.u[b].push_back(ul * q);
      a.eta[b] = s.eta * q;
    }
  }
  return a;
}

Eigen::MatrixXd consensus_network(const PosteriorSamples& samples) {
  if (samples.variant() != Variant::mnlpm)
    throw std::invalid_argument("consensus network needs MNLPM samples (averages eta)");
  if (samples.states.empty()) throw std::invalid_argument("consensus network: no samples");
  const int I = samples.states.front().n_actors();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(I, I);
  for (const auto& s : samples.states) {
    const double scale = std::exp(s.mu_theta);
    for (int i = 0; i < I; ++i)
      for (int ip = i + 1; ip < I; ++ip)
        c(i, ip) += std_normal_cdf(s.mu_zeta - scale * row_distance(s.eta, i, ip));
  }
  c /= static_cast<double>(samples.size());
  for (int i = 0; i < I; ++i)
    for (int ip = 0; ip < i; ++ip) c(i, ip) = c(ip, i);
  return c;
}

Eigen::MatrixXd empirical_consensus(const MultilayerNetwork& net) {
  const int I = net.n_actors();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(I, I);
  for (int j = 0; j < net.n_layers(); ++j) c += net.layer(j).cast<double>();
  if (net.n_layers() > 0) c /= net.n_layers();
  return c;
}

BinaryMatrix majority_consensus(const MultilayerNetwork& net, double threshold) {
  const int I = net.n_actors();
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(I, I);
  for (int j = 0; j < net.n_layers(); ++j) count += net.layer(j).cast<int>();
  const double needed = threshold * net.n_layers();
  BinaryMatrix m = BinaryMatrix::Zero(I, I);
  for (int i = 0; i < I; ++i)
    for (int ip = 0; ip < I; ++ip)
      if (i != ip && count(i, ip) > 0 && count(i, ip) >= needed) m(i, ip) = 1;
  return m;
}

PositionStat parse_position_stat(const std::string& name) {
  if (name == "max") return PositionStat::max;
  if (name == "median") return PositionStat::median;
  throw std::invalid_argument("unknown position statistic '" + name + "' (max|median)");
}

namespace {

Eigen::VectorXd reduce_rows(const Eigen::MatrixXd& u, PositionStat stat) {
  Eigen::VectorXd out(u.rows());
  std::vector<double> row(static_cast<std::size_t>(u.cols()));
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (stat == PositionStat::max) {
      out[i] = u.row(i).maxCoeff();
      continue;
    }
    for (Eigen::Index k = 0; k < u.cols(); ++k) row[k] = u(i, k);
    std::sort(row.begin(), row.end());
    out[i] = quantile_sorted(row, 0.5);
  }
  return out;
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().sum(), syy = dy.square().sum();
  if (!(sxx > 0.0) || !(syy > 0.0)) return NAN;
  return std::clamp((dx * dy).sum() / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

LayerCorrelation layer_correlation(const AlignedSamples& aligned, PositionStat stat) {
  const long B = aligned.size();
  if (B < 2) throw std::invalid_argument("layer correlation needs at least 2 samples");
  if (aligned.n_actors() < 3) throw std::invalid_argument("layer correlation needs at least 3 actors");
  const int L = aligned.position_layers();

  std::vector<std::vector<Eigen::VectorXd>> star(B);
  for (long b = 0; b < B; ++b)
    for (int l = 0; l < L; ++l) star[b].push_back(reduce_rows(aligned.u[b][l], stat));

  LayerCorrelation r;
  r.rho.assign(L, std::vector<IntervalSummary>(L));
  r.excluded = Eigen::MatrixXi::Zero(L, L);
  for (int j = 0; j < L; ++j) {
    r.rho[j][j] = {1.0, 1.0, 1.0, true};
    for (int jp = j + 1; jp < L; ++jp) {
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(B));
      int dropped = 0;
      for (long b = 0; b < B; ++b) {
        const double c = pearson(star[b][j], star[b][jp]);
        if (std::isnan(c))
          ++dropped;
        else
          values.push_back(c);
      }
      r.rho[j][jp] = r.rho[jp][j] = summarize(std::move(values));
      r.excluded(j, jp) = r.excluded(jp, j) = dropped;
    }
  }
  return r;
}

std::vector<IntervalSummary> assessment_index(const AlignedSamples& aligned) {
  const int I = aligned.n_actors();
  if (aligned.position_layers() != I)
    throw std::invalid_argument("assessment index needs one layer per actor (J = I)");
  if (I < 2) throw std::invalid_argument("assessment index needs at least 2 actors");
  const long B = aligned.size();
  std::vector<IntervalSummary> out;
  out.reserve(static_cast<std::size_t>(I));
  for (int i = 0; i < I; ++i) {
    std::vector<double> delta(static_cast<std::size_t>(B));
    for (long b = 0; b < B; ++b) {
      Eigen::RowVectorXd others = Eigen::RowVectorXd::Zero(aligned.dim());
      for (int j = 0; j < I; ++j)
        if (j != i) others += aligned.u[b][j].row(i);
      others /= static_cast<double>(I - 1);
      delta[b] = aligned.u[b][i].row(i).norm() - others.norm();
    }
    out.push_back(summarize(std::move(delta)));
  }
  return out;
}

PositionSummary position_summary(const AlignedSamples& aligned) {
  const long B = aligned.size();
  if (B < 1) throw std::invalid_argument("position summary: no samples");
  const int L = aligned.position_layers();
  const int I = aligned.n_actors();
  const int K = aligned.dim();
  PositionSummary p;
  p.mean.assign(L, Eigen::MatrixXd::Zero(I, K));
  p.variance.assign(L, Eigen::MatrixXd::Zero(I, K));
  p.eta_mean = Eigen::MatrixXd::Zero(I, K);
  p.eta_variance = Eigen::MatrixXd::Zero(I, K);
  for (long b = 0; b < B; ++b) {
    for (int l = 0; l < L; ++l) p.mean[l] += aligned.u[b][l];
    p.eta_mean += aligned.eta[b];
  }
  for (auto& m : p.mean) m /= static_cast<double>(B);
  p.eta_mean /= static_cast<double>(B);
  for (long b = 0; b < B; ++b) {
    for (int l = 0; l < L; ++l) p.variance[l].array() += (aligned.u[b][l] - p.mean[l]).array().square();
    p.eta_variance.array() += (aligned.eta[b] - p.eta_mean).array().square();
  }
  for (auto& v : p.variance) v /= static_cast<double>(B);
  p.eta_variance /= static_cast<double>(B);

  // Spread of mean positions per dimension; IFLPM has no averages, so its
  // layers' mean positions are pooled instead.
  Eigen::MatrixXd basis = p.eta_mean;
  if (aligned.variant == Variant::iflpm) {
    basis.resize(static_cast<Eigen::Index>(I) * L, K);
    for (int l = 0; l < L; ++l) basis.middleRows(static_cast<Eigen::Index>(l) * I, I) = p.mean[l];
  }
  const Eigen::RowVectorXd spread =
      (basis.rowwise() - basis.colwise().mean()).array().square().colwise().sum();
  p.dimension_rank.resize(K);
  std::iota(p.dimension_rank.begin(), p.dimension_rank.end(), 0);
  std::stable_sort(p.dimension_rank.begin(), p.dimension_rank.end(),
                   [&](int a, int b) { return spread[a] > spread[b]; });
  return p;
}

void write_consensus_csv(std::ostream& out, const Eigen::MatrixXd& c,
                         const std::vector<ActorInfo>& actors) {
  auto label = [&](Eigen::Index i) {
    return i < static_cast<Eigen::Index>(actors.size()) ? actors[i].label : std::to_string(i + 1);
  };
  out << "actor";
  for (Eigen::Index i = 0; i < c.cols(); ++i) out << ',' << label(i);
  out << '\n';
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    out << label(i);
    for (Eigen::Index ip = 0; ip < c.cols(); ++ip) out << ',' << c(i, ip);
    out << '\n';
  }
}

void write_correlation_csv(std::ostream& out, const LayerCorrelation& r) {
  out << "j,jp,mean,lo,hi\n";
  const int L = static_cast<int>(r.rho.size());
  for (int j = 0; j < L; ++j)
    for (int jp = j + 1; jp < L; ++jp) {
      const auto& s = r.rho[j][jp];
      out << j + 1 << ',' << jp + 1 << ',' << s.point << ',' << s.lo << ',' << s.hi << '\n';
    }
}

void write_delta_csv(std::ostream& out, const std::vector<IntervalSummary>& delta) {
  out << "i,mean,lo,hi,significant\n";
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const auto& s = delta[i];
    out << i + 1 << ',' << s.point << ',' << s.lo << ',' << s.hi << ',' << (s.significant ? 1 : 0)
        << '\n';
  }
}

void write_positions_csv(std::ostream& out, const PositionSummary& p) {
  out << "i,j,k,mean,var\n";
  const Eigen::Index I = p.eta_mean.rows(), K = p.eta_mean.cols();
  for (Eigen::Index i = 0; i < I; ++i)
    for (Eigen::Index k = 0; k < K; ++k)
      out << i + 1 << ",0," << k + 1 << ',' << p.eta_mean(i, k) << ',' << p.eta_variance(i, k)
          << '\n';
  for (std::size_t l = 0; l < p.mean.size(); ++l)
    for (Eigen::Index i = 0; i < I; ++i)
      for (Eigen::Index k = 0; k < K; ++k)
        out << i + 1 << ',' << l + 1 << ',' << k + 1 << ',' << p.mean[l](i, k) << ','
            << p.variance[l](i, k) << '\n';
}

void write_positions_svg(std::ostream& out, const PositionSummary& p,
                         const std::vector<ActorInfo>& actors,
                         const std::vector<std::string>& layer_labels) {
  constexpr int panel = 320, pad = 30;
  const int d1 = p.dimension_rank[0];
  const int d2 = p.dimension_rank.size() > 1 ? p.dimension_rank[1] : p.dimension_rank[0];

  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> panels;
  panels.emplace_back("average", &p.eta_mean);
  for (std::size_t l = 0; l < p.mean.size(); ++l)
    panels.emplace_back(l < layer_labels.size() && p.mean.size() == layer_labels.size()
                            ? layer_labels[l]
                            : "layer " + std::to_string(l + 1),
                        &p.mean[l]);

  double lo = 0, hi = 0;
  for (const auto& [name, m] : panels)
    for (Eigen::Index i = 0; i < m->rows(); ++i)
      for (int d : {d1, d2}) {
        lo = std::min(lo, (*m)(i, d));
        hi = std::max(hi, (*m)(i, d));
      }
  const double span = hi > lo ? hi - lo : 1.0;
  auto px = [&](double v) { return pad + (v - lo) / span * (panel - 2 * pad); };

  const int width = panel * static_cast<int>(panels.size());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << panel
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t q = 0; q < panels.size(); ++q) {
    const auto& [name, m] = panels[q];
    out << "<g transform=\"translate(" << q * panel << ",0)\">\n"
        << "<rect x=\"1\" y=\"1\" width=\"" << panel - 2 << "\" height=\"" << panel - 2
        << "\" fill=\"none\" stroke=\"#999\"/>\n"
        << "<text x=\"" << pad << "\" y=\"16\">" << name << "</text>\n";
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      const double x = px((*m)(i, d1)), y = panel - px((*m)(i, d2));
      const std::string label =
          i < static_cast<Eigen::Index>(actors.size()) ? actors[i].label : std::to_string(i + 1);
      out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\"/>"
          << "<text x=\"" << x + 4 << "\" y=\"" << y - 4 << "\">" << label << "</text>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace mnlpm
