#include "taxagg/path_decision.hpp"

#include <algorithm>
#include <cmath>

#include "taxagg/errors.hpp"

namespace taxagg {

double normalized_entropy(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("entropy of an empty value set");
  double total = 0.0;
  for (double v : values) total += v;
  if (total <= 0.0) return 1.0;
  if (values.size() == 1) return 0.0;
  double h = 0.0;
  for (double v : values) {
    if (v <= 0.0) continue;
    double q = v / total;
    h -= q * std::log(q);
  }
  return h / std::log(static_cast<double>(values.size()));
}

double value_entropy(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("entropy of an empty value set");
  double total = 0.0;
  for (double v : values) total += v;
  if (total <= 0.0) return 1.0;
  double h = 0.0;
  for (double v : values) {
    if (v <= 0.0) continue;
    h -= v * std::log(v);
  }
  return h / static_cast<double>(values.size());
}

double entropy_of(const std::vector<double>& values, EntropyMode mode) {
  return mode == EntropyMode::distribution ? normalized_entropy(values) : value_entropy(values);
}

LabelPath walk_entropy(const PropagatedScores& scored, const EntropyPolicy& policy,
                       const ClassId& start) {
  const Taxonomy& g = scored.graph;
  LabelPath path;
  int current = g.index_of(start);
  for (;;) {
    path.nodes.push_back(g.name_of(current));
    const auto& kids = g.children(current);
    if (kids.empty()) break;

    std::vector<double> kid_scores;
    kid_scores.reserve(kids.size());
    for (int k : kids) kid_scores.push_back(scored.score.at(g.name_of(k)));

    if (entropy_of(kid_scores, policy.mode) > policy.theta) break;

    int best = kids.front();
    double best_score = kid_scores.front();
    for (std::size_t i = 1; i < kids.size(); ++i) {
      if (kid_scores[i] > best_score) {  // ties keep the lexicographically first child
        best = kids[i];
        best_score = kid_scores[i];
      }
    }
    current = best;
  }
  return path;
}

LabelPath walk_marginal(const PosteriorReport& report, const Taxonomy& t, double tau) {
  auto marginal_of = [&](int node) {
    auto it = report.marginal.find(t.name_of(node));
    return it == report.marginal.end() ? -1.0 : it->second;
  };

  int current = -1;
  for (int r : t.roots()) {
    if (current < 0 || marginal_of(r) > marginal_of(current)) current = r;
  }
  if (current < 0) throw ValidationError("taxonomy has no roots");

  LabelPath path;
  for (;;) {
    path.nodes.push_back(t.name_of(current));
    int best = -1;
    double best_m = 0.0;
    for (int k : t.children(current)) {
      double m = marginal_of(k);
      if (m < tau) continue;
      if (best < 0 || m > best_m) {
        best = k;
        best_m = m;
      }
    }
    if (best < 0) break;
    current = best;
  }
  return path;
}

BackoffResult entry_level_backoff(const LabelPath& path, const std::set<ClassId>& entry_set) {
  BackoffResult out;
  out.path = path;
  std::size_t cut = path.nodes.size();
  for (std::size_t i = path.nodes.size(); i-- > 0;) {
    if (entry_set.count(path.nodes[i])) {
      cut = i + 1;
      out.entry_found = true;
      break;
    }
  }
  if (out.entry_found) out.path.nodes.resize(cut);
  return out;
}

}  // namespace taxagg
