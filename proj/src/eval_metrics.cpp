#include "taxagg/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "taxagg/errors.hpp"

namespace taxagg {

namespace {

// Shortest upward path from `from` to `target` (both inclusive), following
// child->parent edges. Among equal-length paths the lexicographically
// smallest parent is taken at each step. `target` must be an ancestor of
// `from` or `from` itself.
std::vector<Taxonomy::Index> shortest_up_path(const Taxonomy& t, Taxonomy::Index from,
                                              Taxonomy::Index target) {
  const int unreachable = std::numeric_limits<int>::max();
  std::vector<int> dist(static_cast<std::size_t>(t.size()), unreachable);
  dist[static_cast<std::size_t>(target)] = 0;

  // Distance-to-target over descendants of target, children-first.
  std::vector<Taxonomy::Index> frontier{target};
  while (!frontier.empty()) {
    std::vector<Taxonomy::Index> next;
    for (Taxonomy::Index v : frontier) {
      for (Taxonomy::Index ch : t.children(v)) {
        if (dist[static_cast<std::size_t>(ch)] == unreachable) {
          dist[static_cast<std::size_t>(ch)] = dist[static_cast<std::size_t>(v)] + 1;
          next.push_back(ch);
        }
      }
    }
    frontier = std::move(next);
  }

  std::vector<Taxonomy::Index> path{from};
  Taxonomy::Index cur = from;
  while (cur != target) {
    Taxonomy::Index step = -1;
    for (Taxonomy::Index p : t.parents(cur)) {
      if (dist[static_cast<std::size_t>(p)] == dist[static_cast<std::size_t>(cur)] - 1) {
        step = p;  // parents are index-sorted, so the first hit is lexicographic
        break;
      }
    }
    cur = step;
    path.push_back(cur);
  }
  return path;
}

}  // namespace

LcaPrf lca_prf(const Taxonomy& t, const ClassId& predicted, const ClassId& gold) {
  Taxonomy::Index ip = t.index_of(predicted);
  Taxonomy::Index ig = t.index_of(gold);

  ClassId lca;
  try {
    lca = t.lowest_common_ancestor(predicted, gold);
  } catch (const NoCommonAncestorError&) {
    LcaPrf out;
    out.no_common_ancestor = true;
    return out;
  }
  Taxonomy::Index il = t.index_of(lca);

  auto up_pred = shortest_up_path(t, ip, il);
  auto up_gold = shortest_up_path(t, ig, il);
  std::set<Taxonomy::Index> aug_pred(up_pred.begin(), up_pred.end());
  std::set<Taxonomy::Index> aug_gold(up_gold.begin(), up_gold.end());

  std::size_t overlap = 0;
  for (Taxonomy::Index v : aug_pred) overlap += aug_gold.count(v);

  LcaPrf out;
  out.precision = static_cast<double>(overlap) / static_cast<double>(aug_pred.size());
  out.recall = static_cast<double>(overlap) / static_cast<double>(aug_gold.size());
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

EvalReport evaluate(const Taxonomy& t, const std::map<std::string, ClassId>& predictions,
                    const std::map<std::string, std::vector<ClassId>>& golds) {
  if (predictions.empty()) throw EmptyInputError("no instances to evaluate");
  if (predictions.size() != golds.size()) {
    throw KeyMismatchError("prediction and gold instance sets differ in size (" +
                           std::to_string(predictions.size()) + " vs " +
                           std::to_string(golds.size()) + ")");
  }
  for (const auto& [id, gold] : golds) {
    (void)gold;
    if (!predictions.count(id)) throw KeyMismatchError("no prediction for instance " + id);
  }

  EvalReport report;
  for (const auto& [id, predicted] : predictions) {
    const auto& gold_list = golds.at(id);
    if (gold_list.empty()) throw EmptyInputError("instance " + id + " has no gold label");

    // Multi-label gold: score against the F-maximizing label (flagged).
    EvalRow row;
    row.instance_id = id;
    bool first = true;
    for (const ClassId& gold : gold_list) {
      LcaPrf m = lca_prf(t, predicted, gold);
      if (first || m.f1 > row.f1) {
        row.precision = m.precision;
        row.recall = m.recall;
        row.f1 = m.f1;
        row.gold_used = gold;
        first = false;
      }
    }
    row.multi_gold = gold_list.size() > 1;
    report.any_multi_gold = report.any_multi_gold || row.multi_gold;
    report.per_instance.push_back(std::move(row));
  }

  const double n = static_cast<double>(report.per_instance.size());
  for (const auto& row : report.per_instance) {
    report.mean_precision += row.precision / n;
    report.mean_recall += row.recall / n;
    report.mean_f1 += row.f1 / n;
  }
  double vp = 0.0, vr = 0.0, vf = 0.0;
  for (const auto& row : report.per_instance) {
    vp += (row.precision - report.mean_precision) * (row.precision - report.mean_precision);
    vr += (row.recall - report.mean_recall) * (row.recall - report.mean_recall);
    vf += (row.f1 - report.mean_f1) * (row.f1 - report.mean_f1);
  }
  report.std_precision = std::sqrt(vp / n);
  report.std_recall = std::sqrt(vr / n);
  report.std_f1 = std::sqrt(vf / n);
  return report;
}

}  // namespace taxagg
