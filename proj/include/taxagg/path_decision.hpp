#ifndef TAXAGG_PATH_DECISION_HPP
#define TAXAGG_PATH_DECISION_HPP

#include <set>
#include <vector>

#include "taxagg/bayes_net.hpp"
#include "taxagg/propagation.hpp"
#include "taxagg/taxonomy.hpp"

namespace taxagg {

/// How the stopping entropy of a child score set is computed.
///
/// `distribution` renormalizes the scores into a distribution and divides
/// the Shannon entropy by ln(#children), so the result lies in [0,1].
/// `value` takes -sum(v*ln v) over the raw scores divided by #children;
/// with summed probability mass the result grows as the remaining mass
/// thins out, which makes deep low-mass forks trip the threshold while
/// heavy shallow forks do not.
enum class EntropyMode { distribution, value };

struct EntropyPolicy {
  double theta = 0.5;
  EntropyMode mode = EntropyMode::value;
};

struct MarginalPolicy {
  double tau = 0.5;
};

/// Entropy of values renormalized to a distribution, divided by ln(n).
/// Single-element sets give 0; an all-zero set gives 1 (maximal uncertainty).
double normalized_entropy(const std::vector<double>& values);

/// -sum(v ln v) over the raw values divided by n, zero terms skipped.
/// An all-zero set gives 1, mirroring normalized_entropy's convention.
double value_entropy(const std::vector<double>& values);

double entropy_of(const std::vector<double>& values, EntropyMode mode);

/// Greedy downward walk: append the current node, stop once the entropy of
/// the children's scores exceeds theta (strict) or there are no children,
/// else descend into the child with the highest score. Only children present
/// in the propagated subgraph participate. Ties break lexicographically.
LabelPath walk_entropy(const PropagatedScores& scored, const EntropyPolicy& policy,
                       const ClassId& start);

/// From the best root, repeatedly move to the child with the highest
/// marginal among children with marginal >= tau; stop when none qualifies.
/// Nodes missing from the report never qualify.
LabelPath walk_marginal(const PosteriorReport& report, const Taxonomy& t, double tau);

struct BackoffResult {
  LabelPath path;
  bool entry_found = false;  // false: entry set disjoint from path, input returned
};

/// Truncates the path at its deepest node inside entry_set.
BackoffResult entry_level_backoff(const LabelPath& path, const std::set<ClassId>& entry_set);

}  // namespace taxagg

#endif
