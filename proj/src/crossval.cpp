#include "mnlpm/crossval.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "mnlpm/parallel.hpp"

namespace mnlpm {

double auc(const std::vector<bool>& labels, const std::vector<double>& scores) {
  if (labels.size() != scores.size()) throw std::invalid_argument("auc: labels and scores differ in length");
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank-sum form with midranks for ties.
  double rank_sum = 0.0;
  long pos = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    const double midrank = (static_cast<double>(start) + static_cast<double>(end) + 1.0) / 2.0;
    for (std::size_t t = start; t < end; ++t)
      if (labels[order[t]]) {
        rank_sum += midrank;
        ++pos;
      }
    start = end;
  }
  const long neg = static_cast<long>(n) - pos;
  if (pos == 0 || neg == 0) return NAN;
  const double u = rank_sum - static_cast<double>(pos) * (pos + 1) / 2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<Prediction> predict_missing(const PosteriorSamples& samples,
                                        const MultilayerNetwork& masked) {
  std::vector<Prediction> out;
  for (int j = 0; j < masked.n_layers(); ++j)
    for (int i = 0; i < masked.n_actors(); ++i)
      for (int ip = i + 1; ip < masked.n_actors(); ++ip)
        if (!masked.observed(i, ip, j)) out.push_back({{i, ip, j}, masked.edge(i, ip, j), 0.0});
  if (out.empty()) throw std::invalid_argument("predict_missing: no masked triples");
  if (samples.states.empty()) throw std::invalid_argument("predict_missing: no samples");
  for (const auto& s : samples.states)
    for (auto& p : out)
      p.score += interaction_probability(s, samples.variant(), p.triple.i, p.triple.ip, p.triple.j);
  for (auto& p : out) p.score /= static_cast<double>(samples.size());
  return out;
}

CvResult run_cv(const MultilayerNetwork& net, Variant variant, int K, int n_folds,
                const FitConfig& base, std::uint64_t seed, double theta0, int jobs,
                std::optional<double> full_fit_waic) {
  const FoldAssignment folds = make_folds(net, n_folds, derive_seed(seed, 0));
  const Hyperparameters hyper = elicit(K, theta0);
  FitConfig config = base;
  config.variant = variant;
  config.K = K;

  CvResult result;
  result.variant = variant;
  result.K = K;
  result.fold_auc.assign(static_cast<std::size_t>(n_folds), NAN);
  const int tasks = n_folds + (full_fit_waic ? 0 : 1);
  parallel_for(tasks, jobs, [&](int t) {
    FitConfig c = config;
    if (t == n_folds) {
      c.seed = derive_seed(seed, static_cast<std::uint64_t>(K));
      result.waic_full_fit = waic(run_mcmc(net, hyper, c), net).waic;
      return;
    }
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(t) + 1);
    const MultilayerNetwork masked = apply_fold_mask(net, folds, t);
    const auto predictions = predict_missing(run_mcmc(masked, hyper, c), masked);
    std::vector<bool> labels;
    std::vector<double> scores;
    for (const auto& p : predictions) {
      labels.push_back(p.label);
      scores.push_back(p.score);
    }
    result.fold_auc[static_cast<std::size_t>(t)] = auc(labels, scores);
  });
  if (full_fit_waic) result.waic_full_fit = *full_fit_waic;

  double sum = 0.0;
  int defined = 0;
  for (double a : result.fold_auc) {
    if (std::isnan(a)) {
      ++result.undefined_folds;
      continue;
    }
    sum += a;
    ++defined;
  }
  if (defined > 0) result.mean_auc = sum / defined;
  return result;
}

std::vector<VariantComparison> compare_variants(const MultilayerNetwork& net,
                                                const std::vector<Variant>& variants,
                                                const std::vector<int>& K_range,
                                                const FitConfig& base, int n_folds,
                                                double theta0, int jobs) {
  std::vector<VariantComparison> out;
  for (Variant v : variants) {
    VariantComparison cmp{v, {}, std::nullopt, {}};
    FitConfig c = base;
    c.seed = derive_seed(base.seed, 0x5CA0 + static_cast<std::uint64_t>(v));
    cmp.scan = waic_scan(net, v, K_range, c, theta0, jobs);
    if (cmp.scan.best_K == 0) {
      cmp.error = "every WAIC scan cell failed";
    } else {
      const auto best = std::find_if(cmp.scan.rows.begin(), cmp.scan.rows.end(),
                                     [&](const WaicScanRow& r) { return r.K == cmp.scan.best_K; });
      try {
        cmp.cv = run_cv(net, v, cmp.scan.best_K, n_folds, c, c.seed, theta0, jobs, best->waic);
      } catch (const std::exception& e) {
        cmp.error = e.what();
      }
    }
    out.push_back(std::move(cmp));
  }
  return out;
}

void write_cv_csv(std::ostream& out, const std::vector<CvResult>& results) {
  out << "variant,K,fold,auc\n";
  for (const auto& r : results)
    for (std::size_t f = 0; f < r.fold_auc.size(); ++f) {
      out << to_string(r.variant) << ',' << r.K << ',' << f + 1 << ',';
      if (std::isnan(r.fold_auc[f]))
        out << "NA";
      else
        out << r.fold_auc[f];
      out << '\n';
    }
}

void write_cv_summary_csv(std::ostream& out, const std::vector<CvResult>& results) {
  out << "variant,K,mean_auc,waic\n";
  for (const auto& r : results)
    out << to_string(r.variant) << ',' << r.K << ',' << r.mean_auc << ',' << r.waic_full_fit << '\n';
}

}  // namespace mnlpm
