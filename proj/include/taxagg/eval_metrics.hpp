#ifndef TAXAGG_EVAL_METRICS_HPP
#define TAXAGG_EVAL_METRICS_HPP

#include <map>
#include <string>
#include <vector>

#include "taxagg/taxonomy.hpp"

namespace taxagg {

struct LcaPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool no_common_ancestor = false;
};

/// Hierarchical precision/recall/F1 over the lowest common ancestor of the
/// predicted and gold classes: each side is augmented with its shortest
/// upward path to the LCA (lexicographic tie-break), and the metrics are set
/// overlaps of the two augmented paths. Disjoint multi-root pairs score zero
/// with a flag instead of throwing.
LcaPrf lca_prf(const Taxonomy& t, const ClassId& predicted, const ClassId& gold);

struct EvalRow {
  std::string instance_id;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ClassId gold_used;        // which gold label scored (multi-label: the F-maximizing one)
  bool multi_gold = false;
};

struct EvalReport {
  std::vector<EvalRow> per_instance;  // sorted by instance id
  double mean_precision = 0.0, mean_recall = 0.0, mean_f1 = 0.0;
  double std_precision = 0.0, std_recall = 0.0, std_f1 = 0.0;  // population
  bool any_multi_gold = false;
};

/// Per-instance lca_prf plus mean and population standard deviation.
/// Prediction and gold key sets must match exactly.
EvalReport evaluate(const Taxonomy& t, const std::map<std::string, ClassId>& predictions,
                    const std::map<std::string, std::vector<ClassId>>& golds);

}  // namespace taxagg

#endif
