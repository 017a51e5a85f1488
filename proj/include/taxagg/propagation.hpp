#ifndef TAXAGG_PROPAGATION_HPP
#define TAXAGG_PROPAGATION_HPP

#include <map>

#include "taxagg/score_sheet.hpp"
#include "taxagg/taxonomy.hpp"

namespace taxagg {

struct EntropyPolicy;  // path_decision.hpp

/// Classifier scores summed over each scored class and its ancestor set,
/// on the induced subgraph of the scored classes.
struct PropagatedScores {
  Taxonomy graph;
  std::map<ClassId, double> score;
};

/// Adds each classifier's score for class c to c and to every ancestor of c,
/// once per ancestor even when several upward paths reach it, then sums over
/// classifiers. Contributions are accumulated in (classifier, class) order,
/// so permuting input order cannot change the result.
PropagatedScores propagate(const Taxonomy& t, const ScoreSheet& sheet);

/// Propagate, then run the entropy walk from the best root (highest
/// aggregate score, lexicographic tie-break).
LabelPath aggregate_heuristic(const Taxonomy& t, const ScoreSheet& sheet,
                              const EntropyPolicy& policy);

}  // namespace taxagg

#endif
