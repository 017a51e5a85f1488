#ifndef TAXAGG_BAYES_NET_HPP
#define TAXAGG_BAYES_NET_HPP

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "taxagg/taxonomy.hpp"

namespace taxagg {

/// Score model when the class holds (on) vs. does not (off), in transformed
/// (logit) score space.
struct BinormalModel {
  double mu_off = -1.0;
  double sigma_off = 1.0;
  double mu_on = 1.0;
  double sigma_on = 1.0;
};

/// Binary-label classifier: sensitivity = Pr[vote 1 | class holds],
/// specificity = Pr[vote 0 | class absent].
struct DiscreteModel {
  double sensitivity = 0.5;
  double specificity = 0.5;
};

using ObservationModel = std::variant<BinormalModel, DiscreteModel>;

struct ObservationParams {
  std::string classifier_id;
  ClassId class_id;
  ObservationModel model;
  bool fallback = false;  // fitted through the insufficient-data fallback

  bool is_binormal() const { return std::holds_alternative<BinormalModel>(model); }
};

/// Two-valued likelihood of an observed score under class-off / class-on.
struct EvidenceFactor {
  ClassId class_id;
  double like_off = 1.0;
  double like_on = 1.0;
};

/// Exact per-class posteriors for one instance.
struct PosteriorReport {
  std::string instance_id;
  std::map<ClassId, double> marginal;
  double log_evidence = 0.0;
};

struct NetworkConfig {
  int fanout_cap = 20;              // dense CPD tables refuse more parents than this
  bool require_dense_tables = false;
  std::map<ClassId, double> leak_override;    // per-node lambda, nodes with model parents
  std::map<ClassId, double> prior_override;   // per-node prior, parentless nodes
  std::map<ClassId, double> leaf_weight;      // prior mass per full-taxonomy leaf (default 1)
};

/// Logit of y after clamping into [1e-6, 1 - 1e-6].
double transform_score(double y);

/// Inverse of transform_score (plain logistic).
double inverse_transform_score(double x);

/// Likelihood pair for one observed score under an observation model.
/// Binormal models expect the transformed score; discrete models expect a
/// literal 0 or 1.
EvidenceFactor score_evidence(const ObservationParams& obs, double observed);

/// Bayesian network over the induced subgraph of the modeled classes.
///
/// Each class is a binary node whose model parents are its taxonomy
/// children present in the subgraph; the CPD is a leaky deterministic OR:
/// certainly on when any child is on, else on with the leak probability.
/// Parentless nodes carry a prior instead. CPDs are evaluated lazily;
/// dense tables exist only behind the fanout cap.
class Network {
public:
  int size() const { return static_cast<int>(node_leak_.size()); }
  const Taxonomy& graph() const { return graph_; }
  const std::vector<ClassId>& node_names() const { return graph_.classes(); }
  int index_of(const ClassId& c) const { return graph_.index_of(c); }

  const std::vector<int>& model_parents(int node) const {
    return graph_.children(node);
  }
  bool has_model_parents(int node) const { return !model_parents(node).empty(); }

  /// Leak probability for parented nodes, prior for parentless ones.
  double leak(int node) const { return node_leak_[static_cast<std::size_t>(node)]; }

  /// CPD entry Pr[node on | parent configuration summarized as any-on].
  double prob_on(int node, bool any_parent_on) const {
    return any_parent_on ? 1.0 : node_leak_[static_cast<std::size_t>(node)];
  }

  /// Pr[node on | parent bits], one entry per parent configuration; bit i of
  /// the row index is the value of model_parents(node)[i]. Throws
  /// FanoutError above the fanout cap.
  std::vector<double> dense_table(int node) const;

  const std::vector<ObservationParams>& hooks() const { return hooks_; }
  int fanout_cap() const { return fanout_cap_; }

  friend Network build_network(const Taxonomy& full, const std::vector<ObservationParams>& models,
                               const NetworkConfig& cfg);

private:
  Taxonomy graph_;
  std::vector<double> node_leak_;
  std::vector<ObservationParams> hooks_;  // sorted by (classifier, class)
  int fanout_cap_ = 20;
};

Network build_network(const Taxonomy& full, const std::vector<ObservationParams>& models,
                      const NetworkConfig& cfg = {});

/// Deterministic text dump of nodes, parents, CPDs and hooks, for golden
/// comparisons and debugging.
std::string debug_dump(const Network& net);

}  // namespace taxagg

#endif
