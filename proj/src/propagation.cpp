#include "taxagg/propagation.hpp"

#include <vector>

#include "taxagg/errors.hpp"
#include "taxagg/path_decision.hpp"

namespace taxagg {

PropagatedScores propagate(const Taxonomy& t, const ScoreSheet& sheet) {
  validate_sheet(t, sheet);

  std::vector<ClassId> scored;
  for (const auto& [classifier, class_scores] : sheet.scores) {
    for (const auto& [class_id, score] : class_scores) {
      (void)score;
      scored.push_back(class_id);
    }
  }
  if (scored.empty()) throw EmptyInputError("sheet for instance " + sheet.instance_id + " has no scores");

  PropagatedScores out;
  out.graph = t.induced_subgraph(scored);
  for (const ClassId& c : out.graph.classes()) out.score[c] = 0.0;

  // Ancestor SET semantics: one contribution per (classifier, class) pair to
  // each member of the closure, regardless of how many upward paths exist.
  for (const auto& [classifier, class_scores] : sheet.scores) {
    (void)classifier;
    for (const auto& [class_id, score] : class_scores) {
      Taxonomy::Index i = t.index_of(class_id);
      out.score[class_id] += score;
      for (Taxonomy::Index a : t.ancestors(i)) {
        out.score[t.name_of(a)] += score;
      }
    }
  }
  return out;
}

LabelPath aggregate_heuristic(const Taxonomy& t, const ScoreSheet& sheet,
                              const EntropyPolicy& policy) {
  PropagatedScores scored = propagate(t, sheet);

  // Multi-root subgraphs start from the root with the largest mass;
  // the sorted class order breaks ties lexicographically.
  const Taxonomy& g = scored.graph;
  int best = -1;
  for (int r : g.roots()) {
    if (best < 0 || scored.score.at(g.name_of(r)) > scored.score.at(g.name_of(best))) best = r;
  }
  return walk_entropy(scored, policy, g.name_of(best));
}

}  // namespace taxagg
