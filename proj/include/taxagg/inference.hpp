#ifndef TAXAGG_INFERENCE_HPP
#define TAXAGG_INFERENCE_HPP

#include <string>
#include <vector>

#include "taxagg/bayes_net.hpp"

namespace taxagg {

/// Exact inference engine: moralize, triangulate (greedy min-fill with
/// lexicographic tie-break), build a clique forest over the maximal cliques,
/// then calibrate with two-pass sum-product. Construction is done once per
/// network; infer() is const and safe to call concurrently for independent
/// instances.
class JunctionTree {
public:
  explicit JunctionTree(const Network& net, int treewidth_cap = 20);

  PosteriorReport infer(const std::vector<EvidenceFactor>& evidence,
                        const std::string& instance_id = "") const;

  int max_clique_size() const { return max_clique_size_; }
  int clique_count() const { return static_cast<int>(cliques_.size()); }

private:
  struct Clique {
    std::vector<int> nodes;        // sorted network node indices
    std::vector<double> base;      // 2^|nodes| potential with assigned CPDs
    std::vector<int> neighbors;    // clique indices
  };
  struct Link {
    int from = -1;                 // parent clique towards the component root
    std::vector<int> sep;          // sorted separator nodes
  };

  std::vector<double> collect_message(const std::vector<std::vector<double>>& tables,
                                      std::vector<std::vector<double>>& inbox_product,
                                      int clique, int parent, double& log_norm) const;

  Network net_;
  std::vector<Clique> cliques_;
  std::vector<Link> links_;            // per clique: its upward edge (roots: from = -1)
  std::vector<int> visit_order_;       // component roots first, parents before children
  std::vector<int> home_clique_;       // per node: lowest-index clique containing it
  int max_clique_size_ = 0;
};

/// Exact marginals via a one-shot junction tree.
PosteriorReport infer_marginals(const Network& net, const std::vector<EvidenceFactor>& evidence,
                                const std::string& instance_id = "", int treewidth_cap = 20);

/// Exact marginals by full enumeration; the testing oracle. Refuses networks
/// above `node_cap` nodes.
PosteriorReport brute_force_marginals(const Network& net,
                                      const std::vector<EvidenceFactor>& evidence,
                                      const std::string& instance_id = "", int node_cap = 20);

}  // namespace taxagg

#endif
