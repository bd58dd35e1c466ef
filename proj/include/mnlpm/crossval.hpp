#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "mnlpm/diagnostics.hpp"
#include "mnlpm/network.hpp"
#include "mnlpm/sampler.hpp"

namespace mnlpm {

/// Mann-Whitney AUC, ties counted one half. NaN when one class is empty.
double auc(const std::vector<bool>& labels, const std::vector<double>& scores);

struct Prediction {
  Triple triple;
  bool label;    // y stored in the network for the held-out triple
  double score;  // posterior mean of theta_ii'j
};

/// Scores every masked i < i' triple. Throws std::invalid_argument when
/// nothing is masked.
std::vector<Prediction> predict_missing(const PosteriorSamples& samples,
                                        const MultilayerNetwork& masked);

struct CvResult {
  Variant variant = Variant::mnlpm;
  int K = 0;
  std::vector<double> fold_auc;  // NaN for single-class folds
  int undefined_folds = 0;
  double mean_auc = NAN;
  double waic_full_fit = NAN;
};

/// Seeds: folds use derive_seed(seed, 0), fold f fits derive_seed(seed, f + 1)
/// and the full fit derive_seed(seed, K), as in waic_scan. Pass `full_fit_waic`
/// to reuse a known full-data WAIC instead of refitting.
CvResult run_cv(const MultilayerNetwork& net, Variant variant, int K, int n_folds,
                const FitConfig& base, std::uint64_t seed, double theta0 = 0.1, int jobs = 1,
                std::optional<double> full_fit_waic = std::nullopt);

struct VariantComparison {
  Variant variant;
  WaicScan scan;
  std::optional<CvResult> cv;  // empty when every scan cell failed
  std::string error;
};

/// WAIC scan per variant, then CV at that variant's WAIC-optimal K.
std::vector<VariantComparison> compare_variants(const MultilayerNetwork& net,
                                                const std::vector<Variant>& variants,
                                                const std::vector<int>& K_range,
                                                const FitConfig& base, int n_folds,
                                                double theta0 = 0.1, int jobs = 1);

void write_cv_csv(std::ostream& out, const std::vector<CvResult>& results);
void write_cv_summary_csv(std::ostream& out, const std::vector<CvResult>& results);

}  // namespace mnlpm
