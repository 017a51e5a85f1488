#ifndef TAXAGG_ESTIMATION_HPP
#define TAXAGG_ESTIMATION_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "taxagg/bayes_net.hpp"
#include "taxagg/score_sheet.hpp"
#include "taxagg/taxonomy.hpp"

namespace taxagg {

/// Binary membership implied by a gold class: 1 on the class and all its
/// ancestors, 0 elsewhere.
std::map<ClassId, int> gold_to_binary(const Taxonomy& t, const ClassId& gold);

/// Union of gold_to_binary over several gold labels (multi-label records).
std::map<ClassId, int> gold_to_binary(const Taxonomy& t, const std::vector<ClassId>& golds);

struct BinormalFit {
  BinormalModel model;
  bool fallback = false;       // insufficient per-group data, pooled defaults used
  double count_off = 0.0;      // effective observation mass per side
  double count_on = 0.0;
};

/// Class-conditional Gaussian fit from (transformed score, membership) pairs.
/// Population variance, sigma floored. With fewer than two observations on
/// either side, falls back to pooled variance with means at pooled mean -/+ 1
/// and sets the fallback flag.
BinormalFit fit_binormal(const std::vector<std::pair<double, int>>& samples,
                         double sigma_floor = 1e-3);

/// Membership-weighted Gaussian fit shared by the supervised path and the
/// EM M-step: weight w is the probability the class holds for that sample.
/// Pairs are reduced in sorted order so input permutations cannot change the
/// result. A side whose total weight vanishes keeps `previous` (if given).
BinormalFit fit_binormal_weighted(std::vector<std::pair<double, double>> samples,
                                  double sigma_floor = 1e-3,
                                  const BinormalModel* previous = nullptr);

struct DiscreteFit {
  DiscreteModel model;
  double count_off = 0.0;
  double count_on = 0.0;
};

/// Smoothed sensitivity/specificity from (vote, membership) pairs.
DiscreteFit fit_discrete(const std::vector<std::pair<int, int>>& samples, double smoothing = 1.0);

/// Membership-weighted variant used by the EM M-step.
DiscreteFit fit_discrete_weighted(const std::vector<std::pair<int, double>>& samples,
                                  double smoothing = 1.0);

/// Per-instance class membership probabilities.
struct SoftLabels {
  std::map<std::string, std::map<ClassId, double>> q;
};

enum class FitKind { binormal, discrete };

/// Supervised fit of every (classifier, class) hook present in the sheets
/// against gold labels. Instances without a gold record are an error.
std::vector<ObservationParams> fit_from_validation(
    const Taxonomy& t, const std::vector<ScoreSheet>& sheets,
    const std::map<std::string, std::vector<ClassId>>& golds, FitKind kind,
    double sigma_floor = 1e-3, double smoothing = 1.0);

/// Symmetric starting point when no labels exist: off/on means at -/+1,
/// unit sigma, on every hook present in the sheets (binormal only).
std::vector<ObservationParams> default_em_init(const std::vector<ScoreSheet>& sheets);

struct EmOptions {
  int max_iters = 50;
  double tol = 1e-4;             // stop when log-evidence improves by less
  double sigma_floor = 1e-3;
  double smoothing = 1.0;        // discrete-hook pseudo-count
  int treewidth_cap = 20;
  NetworkConfig network;
};

struct HookCounts {
  double count_off = 0.0;
  double count_on = 0.0;
};

struct EmResult {
  std::vector<ObservationParams> params;
  SoftLabels labels;                       // from the final E-step
  std::vector<double> log_likelihood;      // one entry per E-step
  bool converged = false;
  std::map<std::pair<std::string, ClassId>, HookCounts> effective_counts;
};

/// One M-step: refit every hook from membership-weighted samples. Exposed
/// separately so the supervised/EM degeneracy (weights clamped to gold
/// binaries reproduce the supervised fits) is directly testable.
std::vector<ObservationParams> em_m_step(const std::vector<ObservationParams>& current,
                                         const std::vector<ScoreSheet>& sheets,
                                         const SoftLabels& labels, double sigma_floor = 1e-3,
                                         double smoothing = 1.0);

/// Alternates exact-inference E-steps with weighted-moment M-steps, keeping
/// network structure and leaks fixed. Aborts if the log-evidence ever drops
/// by more than 1e-8: the M-step is an exact maximizer, so that indicates a
/// bug, not data trouble.
EmResult em_fit(const Taxonomy& t, const std::vector<ScoreSheet>& sheets,
                std::vector<ObservationParams> init, const EmOptions& opts = {});

}  // namespace taxagg

#endif
