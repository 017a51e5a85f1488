#include "taxagg/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "taxagg/errors.hpp"
#include "taxagg/inference.hpp"

namespace taxagg {

namespace {

constexpr double kDegenerateWeight = 1e-12;
constexpr double kMonotonicitySlack = 1e-8;

using HookKey = std::pair<std::string, ClassId>;

HookKey key_of(const ObservationParams& p) { return {p.classifier_id, p.class_id}; }

}  // namespace

std::map<ClassId, int> gold_to_binary(const Taxonomy& t, const ClassId& gold) {
  return gold_to_binary(t, std::vector<ClassId>{gold});
}

std::map<ClassId, int> gold_to_binary(const Taxonomy& t, const std::vector<ClassId>& golds) {
  std::map<ClassId, int> out;
  for (const ClassId& c : t.classes()) out[c] = 0;
  for (const ClassId& gold : golds) {
    Taxonomy::Index g = t.index_of(gold);
    out[gold] = 1;
    for (Taxonomy::Index a : t.ancestors(g)) out[t.name_of(a)] = 1;
  }
  return out;
}

BinormalFit fit_binormal_weighted(std::vector<std::pair<double, double>> samples,
                                  double sigma_floor, const BinormalModel* previous) {
  if (samples.empty()) throw InsufficientDataError("no samples to fit");
  std::sort(samples.begin(), samples.end());

  double w_on = 0.0, w_off = 0.0, sum_on = 0.0, sum_off = 0.0;
  for (const auto& [x, w] : samples) {
    w_on += w;
    w_off += 1.0 - w;
    sum_on += w * x;
    sum_off += (1.0 - w) * x;
  }

  BinormalFit fit;
  fit.count_on = w_on;
  fit.count_off = w_off;
  if (previous) fit.model = *previous;

  if (w_on > kDegenerateWeight) {
    double mu = sum_on / w_on;
    double ss = 0.0;
    for (const auto& [x, w] : samples) ss += w * (x - mu) * (x - mu);
    fit.model.mu_on = mu;
    fit.model.sigma_on = std::max(sigma_floor, std::sqrt(ss / w_on));
  }
  if (w_off > kDegenerateWeight) {
    double mu = sum_off / w_off;
    double ss = 0.0;
    for (const auto& [x, w] : samples) ss += (1.0 - w) * (x - mu) * (x - mu);
    fit.model.mu_off = mu;
    fit.model.sigma_off = std::max(sigma_floor, std::sqrt(ss / w_off));
  }
  return fit;
}

BinormalFit fit_binormal(const std::vector<std::pair<double, int>>& samples, double sigma_floor) {
  if (samples.empty()) throw InsufficientDataError("no samples to fit");
  int n_on = 0, n_off = 0;
  for (const auto& [x, z] : samples) {
    (void)x;
    (z ? n_on : n_off)++;
  }

  if (n_on < 2 || n_off < 2) {
    // Pooled fallback: shared spread, means offset one unit either side.
    double mean = 0.0;
    for (const auto& [x, z] : samples) {
      (void)z;
      mean += x;
    }
    mean /= static_cast<double>(samples.size());
    double ss = 0.0;
    for (const auto& [x, z] : samples) {
      (void)z;
      ss += (x - mean) * (x - mean);
    }
    double sigma = std::max(sigma_floor, std::sqrt(ss / static_cast<double>(samples.size())));
    BinormalFit fit;
    fit.model = BinormalModel{mean - 1.0, sigma, mean + 1.0, sigma};
    fit.fallback = true;
    fit.count_on = n_on;
    fit.count_off = n_off;
    return fit;
  }

  std::vector<std::pair<double, double>> weighted;
  weighted.reserve(samples.size());
  for (const auto& [x, z] : samples) weighted.emplace_back(x, static_cast<double>(z));
  return fit_binormal_weighted(std::move(weighted), sigma_floor);
}

DiscreteFit fit_discrete_weighted(const std::vector<std::pair<int, double>>& samples,
                                  double smoothing) {
  double on_votes = 0.0, on_total = 0.0, off_rejects = 0.0, off_total = 0.0;
  for (const auto& [vote, w] : samples) {
    on_total += w;
    off_total += 1.0 - w;
    if (vote) {
      on_votes += w;
    } else {
      off_rejects += 1.0 - w;
    }
  }
  DiscreteFit fit;
  fit.count_on = on_total;
  fit.count_off = off_total;
  fit.model.sensitivity = (on_votes + smoothing) / (on_total + 2.0 * smoothing);
  fit.model.specificity = (off_rejects + smoothing) / (off_total + 2.0 * smoothing);
  return fit;
}

DiscreteFit fit_discrete(const std::vector<std::pair<int, int>>& samples, double smoothing) {
  std::vector<std::pair<int, double>> weighted;
  weighted.reserve(samples.size());
  for (const auto& [vote, z] : samples) weighted.emplace_back(vote, static_cast<double>(z));
  return fit_discrete_weighted(weighted, smoothing);
}

std::vector<ObservationParams> fit_from_validation(
    const Taxonomy& t, const std::vector<ScoreSheet>& sheets,
    const std::map<std::string, std::vector<ClassId>>& golds, FitKind kind, double sigma_floor,
    double smoothing) {
  if (sheets.empty()) throw EmptyInputError("no score sheets");

  // Membership bits per instance, from the gold closure.
  std::map<std::string, std::map<ClassId, int>> membership;
  for (const auto& sheet : sheets) {
    validate_sheet(t, sheet);
    auto it = golds.find(sheet.instance_id);
    if (it == golds.end()) {
      throw KeyMismatchError("instance " + sheet.instance_id + " has no gold label");
    }
    for (const ClassId& g : it->second) t.index_of(g);
    membership[sheet.instance_id] = gold_to_binary(t, it->second);
  }

  std::map<HookKey, std::vector<std::pair<double, int>>> gaussian_samples;
  std::map<HookKey, std::vector<std::pair<int, int>>> vote_samples;
  for (const auto& sheet : sheets) {
    const auto& bits = membership.at(sheet.instance_id);
    for (const auto& [classifier, class_scores] : sheet.scores) {
      for (const auto& [class_id, score] : class_scores) {
        int z = bits.at(class_id);
        if (kind == FitKind::binormal) {
          gaussian_samples[{classifier, class_id}].emplace_back(transform_score(score), z);
        } else {
          if (score != 0.0 && score != 1.0) {
            throw InvalidScoreError("discrete fit expects 0/1 votes; instance " +
                                    sheet.instance_id + ", classifier " + classifier + ", class " +
                                    class_id);
          }
          vote_samples[{classifier, class_id}].emplace_back(score == 1.0 ? 1 : 0, z);
        }
      }
    }
  }

  std::vector<ObservationParams> out;
  if (kind == FitKind::binormal) {
    for (const auto& [key, samples] : gaussian_samples) {
      BinormalFit fit = fit_binormal(samples, sigma_floor);
      out.push_back(ObservationParams{key.first, key.second, fit.model, fit.fallback});
    }
  } else {
    for (const auto& [key, samples] : vote_samples) {
      DiscreteFit fit = fit_discrete(samples, smoothing);
      out.push_back(ObservationParams{key.first, key.second, fit.model, false});
    }
  }
  return out;
}

std::vector<ObservationParams> default_em_init(const std::vector<ScoreSheet>& sheets) {
  std::map<HookKey, bool> hooks;
  for (const auto& sheet : sheets) {
    for (const auto& [classifier, class_scores] : sheet.scores) {
      for (const auto& [class_id, score] : class_scores) {
        (void)score;
        hooks[{classifier, class_id}] = true;
      }
    }
  }
  std::vector<ObservationParams> out;
  for (const auto& [key, used] : hooks) {
    (void)used;
    out.push_back(ObservationParams{key.first, key.second, BinormalModel{-1.0, 1.0, 1.0, 1.0}});
  }
  return out;
}

std::vector<ObservationParams> em_m_step(const std::vector<ObservationParams>& current,
                                         const std::vector<ScoreSheet>& sheets,
                                         const SoftLabels& labels, double sigma_floor,
                                         double smoothing) {
  std::map<HookKey, std::vector<std::pair<double, double>>> gaussian_samples;
  std::map<HookKey, std::vector<std::pair<int, double>>> vote_samples;
  std::map<HookKey, const ObservationParams*> by_key;
  for (const auto& p : current) by_key[key_of(p)] = &p;

  for (const auto& sheet : sheets) {
    auto qit = labels.q.find(sheet.instance_id);
    if (qit == labels.q.end()) {
      throw KeyMismatchError("no soft labels for instance " + sheet.instance_id);
    }
    for (const auto& [classifier, class_scores] : sheet.scores) {
      for (const auto& [class_id, score] : class_scores) {
        auto hit = by_key.find({classifier, class_id});
        if (hit == by_key.end()) {
          throw ValidationError("sheet entry " + classifier + "/" + class_id +
                                " has no observation model");
        }
        double w = qit->second.at(class_id);
        if (hit->second->is_binormal()) {
          gaussian_samples[{classifier, class_id}].emplace_back(transform_score(score), w);
        } else {
          if (score != 0.0 && score != 1.0) {
            throw InvalidScoreError("discrete hook " + classifier + "/" + class_id +
                                    " expects 0/1 votes; instance " + sheet.instance_id);
          }
          vote_samples[{classifier, class_id}].emplace_back(score == 1.0 ? 1 : 0, w);
        }
      }
    }
  }

  std::vector<ObservationParams> next = current;
  std::sort(next.begin(), next.end(), [](const auto& a, const auto& b) {
    return key_of(a) < key_of(b);
  });
  for (auto& p : next) {
    if (p.is_binormal()) {
      auto it = gaussian_samples.find(key_of(p));
      if (it == gaussian_samples.end()) continue;  // abstained everywhere: keep params
      const auto& prev = std::get<BinormalModel>(p.model);
      BinormalFit fit = fit_binormal_weighted(it->second, sigma_floor, &prev);
      p.model = fit.model;
    } else {
      auto it = vote_samples.find(key_of(p));
      if (it == vote_samples.end()) continue;
      p.model = fit_discrete_weighted(it->second, smoothing).model;
    }
  }
  return next;
}

EmResult em_fit(const Taxonomy& t, const std::vector<ScoreSheet>& sheets,
                std::vector<ObservationParams> init, const EmOptions& opts) {
  if (sheets.empty()) throw EmptyInputError("no score sheets");
  if (init.empty()) throw EmptyInputError("no initial observation models");
  for (const auto& sheet : sheets) validate_sheet(t, sheet);

  Network net = build_network(t, init, opts.network);
  JunctionTree jt(net, opts.treewidth_cap);
  std::map<HookKey, const ObservationParams*> hook_index;

  EmResult result;
  result.params = std::move(init);
  std::sort(result.params.begin(), result.params.end(), [](const auto& a, const auto& b) {
    return key_of(a) < key_of(b);
  });

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    hook_index.clear();
    for (const auto& p : result.params) hook_index[key_of(p)] = &p;

    // E-step: exact marginals per instance under the current parameters.
    SoftLabels labels;
    double ll = 0.0;
    for (const auto& sheet : sheets) {
      std::vector<EvidenceFactor> evidence;
      for (const auto& [classifier, class_scores] : sheet.scores) {
        for (const auto& [class_id, score] : class_scores) {
          auto hit = hook_index.find({classifier, class_id});
          if (hit == hook_index.end()) {
            throw ValidationError("sheet entry " + classifier + "/" + class_id +
                                  " has no observation model");
          }
          double observed = hit->second->is_binormal() ? transform_score(score) : score;
          evidence.push_back(score_evidence(*hit->second, observed));
        }
      }
      PosteriorReport rep = jt.infer(evidence, sheet.instance_id);
      ll += rep.log_evidence;
      labels.q[sheet.instance_id] = std::move(rep.marginal);
    }

    if (!result.log_likelihood.empty()) {
      double prev = result.log_likelihood.back();
      if (ll < prev - kMonotonicitySlack) {
        throw NonImprovingLikelihoodError(
            "log-evidence dropped from " + std::to_string(prev) + " to " + std::to_string(ll) +
            " at iteration " + std::to_string(iter) + "; the M-step should be an exact maximizer");
      }
      result.log_likelihood.push_back(ll);
      result.labels = std::move(labels);
      if (ll - prev < opts.tol) {
        result.converged = true;
        break;
      }
    } else {
      result.log_likelihood.push_back(ll);
      result.labels = std::move(labels);
    }

    result.params = em_m_step(result.params, sheets, result.labels, opts.sigma_floor,
                              opts.smoothing);
  }

  // Effective per-hook observation mass under the final responsibilities.
  for (const auto& p : result.params) {
    result.effective_counts[key_of(p)] = HookCounts{};
  }
  for (const auto& sheet : sheets) {
    const auto& q = result.labels.q.at(sheet.instance_id);
    for (const auto& [classifier, class_scores] : sheet.scores) {
      for (const auto& [class_id, score] : class_scores) {
        (void)score;
        auto& counts = result.effective_counts.at({classifier, class_id});
        double w = q.at(class_id);
        counts.count_on += w;
        counts.count_off += 1.0 - w;
      }
    }
  }
  return result;
}

}  // namespace taxagg
