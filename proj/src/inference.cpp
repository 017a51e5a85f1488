#include "taxagg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "taxagg/errors.hpp"

namespace taxagg {

namespace {

// Positions (bit indices) of the sorted subset `sub` within the sorted
// clique node list `nodes`.
std::vector<int> positions_of(const std::vector<int>& nodes, const std::vector<int>& sub) {
  std::vector<int> pos;
  pos.reserve(sub.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < nodes.size() && j < sub.size(); ++i) {
    if (nodes[i] == sub[j]) {
      pos.push_back(static_cast<int>(i));
      ++j;
    }
  }
  return pos;
}

std::size_t gather_bits(std::size_t cfg, const std::vector<int>& pos) {
  std::size_t out = 0;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    out |= ((cfg >> pos[k]) & 1u) << k;
  }
  return out;
}

std::vector<double> marginalize(const std::vector<double>& table, const std::vector<int>& pos) {
  std::vector<double> out(std::size_t{1} << pos.size(), 0.0);
  for (std::size_t cfg = 0; cfg < table.size(); ++cfg) {
    out[gather_bits(cfg, pos)] += table[cfg];
  }
  return out;
}

void multiply_in(std::vector<double>& table, const std::vector<double>& msg,
                 const std::vector<int>& pos) {
  for (std::size_t cfg = 0; cfg < table.size(); ++cfg) {
    table[cfg] *= msg[gather_bits(cfg, pos)];
  }
}

double normalize(std::vector<double>& msg) {
  double sum = 0.0;
  for (double v : msg) sum += v;
  if (sum > 0.0) {
    for (double& v : msg) v /= sum;
  }
  return sum;
}

void check_evidence(const Network& net, const EvidenceFactor& f) {
  net.index_of(f.class_id);  // throws UnknownClassError
  if (!(f.like_off >= 0.0) || !(f.like_on >= 0.0)) {
    throw ValidationError("negative likelihood in evidence for " + f.class_id);
  }
  if (f.like_off == 0.0 && f.like_on == 0.0) {
    throw ValidationError("evidence for " + f.class_id + " is zero under both states");
  }
}

}  // namespace

JunctionTree::JunctionTree(const Network& net, int treewidth_cap) : net_(net) {
  const int n = net_.size();

  // Moral graph: each node's family {node, model parents} becomes a clique.
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    std::vector<int> family(net_.model_parents(v));
    family.push_back(v);
    for (std::size_t i = 0; i < family.size(); ++i) {
      for (std::size_t j = i + 1; j < family.size(); ++j) {
        adj[static_cast<std::size_t>(family[i])].insert(family[j]);
        adj[static_cast<std::size_t>(family[j])].insert(family[i]);
      }
    }
  }

  // Greedy min-fill elimination; ties pick the smallest node index, which is
  // the lexicographically smallest class id.
  std::vector<std::set<int>> work = adj;
  std::vector<bool> eliminated(static_cast<std::size_t>(n), false);
  std::vector<std::vector<int>> candidates;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    long best_fill = 0;
    for (int v = 0; v < n; ++v) {
      if (eliminated[static_cast<std::size_t>(v)]) continue;
      std::vector<int> nb(work[static_cast<std::size_t>(v)].begin(),
                          work[static_cast<std::size_t>(v)].end());
      long fill = 0;
      for (std::size_t i = 0; i < nb.size(); ++i) {
        for (std::size_t j = i + 1; j < nb.size(); ++j) {
          if (!work[static_cast<std::size_t>(nb[i])].count(nb[j])) ++fill;
        }
      }
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }

    std::vector<int> clique(work[static_cast<std::size_t>(best)].begin(),
                            work[static_cast<std::size_t>(best)].end());
    clique.push_back(best);
    std::sort(clique.begin(), clique.end());
    if (static_cast<int>(clique.size()) - 1 > treewidth_cap) {
      throw TreewidthError("induced width " + std::to_string(clique.size() - 1) +
                           " exceeds the cap of " + std::to_string(treewidth_cap));
    }
    candidates.push_back(clique);

    std::vector<int> nb(work[static_cast<std::size_t>(best)].begin(),
                        work[static_cast<std::size_t>(best)].end());
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        work[static_cast<std::size_t>(nb[i])].insert(nb[j]);
        work[static_cast<std::size_t>(nb[j])].insert(nb[i]);
      }
      work[static_cast<std::size_t>(nb[i])].erase(best);
    }
    work[static_cast<std::size_t>(best)].clear();
    eliminated[static_cast<std::size_t>(best)] = true;
  }

  // Later candidates can only be subsets of earlier ones, never supersets.
  for (const auto& cand : candidates) {
    bool subsumed = false;
    for (const auto& kept : cliques_) {
      if (std::includes(kept.nodes.begin(), kept.nodes.end(), cand.begin(), cand.end())) {
        subsumed = true;
        break;
      }
    }
    if (!subsumed) {
      cliques_.push_back(Clique{cand, {}, {}});
      max_clique_size_ = std::max(max_clique_size_, static_cast<int>(cand.size()));
    }
  }

  // Maximum-weight spanning forest over separator sizes (Prim per component)
  // gives a junction forest with the running intersection property.
  const int m = static_cast<int>(cliques_.size());
  links_.assign(static_cast<std::size_t>(m), Link{});
  std::vector<bool> visited(static_cast<std::size_t>(m), false);
  auto intersection = [&](int a, int b) {
    std::vector<int> sep;
    std::set_intersection(cliques_[static_cast<std::size_t>(a)].nodes.begin(),
                          cliques_[static_cast<std::size_t>(a)].nodes.end(),
                          cliques_[static_cast<std::size_t>(b)].nodes.begin(),
                          cliques_[static_cast<std::size_t>(b)].nodes.end(),
                          std::back_inserter(sep));
    return sep;
  };
  for (int s = 0; s < m; ++s) {
    if (visited[static_cast<std::size_t>(s)]) continue;
    visited[static_cast<std::size_t>(s)] = true;
    visit_order_.push_back(s);
    for (;;) {
      int best_i = -1, best_j = -1;
      std::size_t best_w = 0;
      for (int j = 0; j < m; ++j) {
        if (visited[static_cast<std::size_t>(j)]) continue;
        for (int i = 0; i < m; ++i) {
          if (!visited[static_cast<std::size_t>(i)]) continue;
          std::size_t w = intersection(i, j).size();
          if (w > best_w) {
            best_w = w;
            best_i = i;
            best_j = j;
          }
        }
      }
      if (best_j < 0) break;  // component exhausted
      visited[static_cast<std::size_t>(best_j)] = true;
      visit_order_.push_back(best_j);
      links_[static_cast<std::size_t>(best_j)].from = best_i;
      links_[static_cast<std::size_t>(best_j)].sep = intersection(best_i, best_j);
      cliques_[static_cast<std::size_t>(best_i)].neighbors.push_back(best_j);
      cliques_[static_cast<std::size_t>(best_j)].neighbors.push_back(best_i);
    }
  }

  // Assign each node's CPD to the lowest-index clique containing its family,
  // and remember a home clique per node for evidence and marginal readout.
  home_clique_.assign(static_cast<std::size_t>(n), -1);
  for (auto& c : cliques_) c.base.assign(std::size_t{1} << c.nodes.size(), 1.0);
  for (int v = 0; v < n; ++v) {
    std::vector<int> family(net_.model_parents(v));
    family.push_back(v);
    std::sort(family.begin(), family.end());
    int fam_clique = -1;
    for (int c = 0; c < m; ++c) {
      const auto& nodes = cliques_[static_cast<std::size_t>(c)].nodes;
      if (home_clique_[static_cast<std::size_t>(v)] < 0 &&
          std::binary_search(nodes.begin(), nodes.end(), v)) {
        home_clique_[static_cast<std::size_t>(v)] = c;
      }
      if (fam_clique < 0 && std::includes(nodes.begin(), nodes.end(), family.begin(), family.end())) {
        fam_clique = c;
      }
    }

    auto& clique = cliques_[static_cast<std::size_t>(fam_clique)];
    std::vector<int> self_pos = positions_of(clique.nodes, {v});
    std::vector<int> par_pos = positions_of(clique.nodes, [&] {
      std::vector<int> ps(net_.model_parents(v));
      std::sort(ps.begin(), ps.end());
      return ps;
    }());
    for (std::size_t cfg = 0; cfg < clique.base.size(); ++cfg) {
      bool self_on = (cfg >> self_pos[0]) & 1u;
      bool any_parent_on = gather_bits(cfg, par_pos) != 0;
      double p_on = net_.prob_on(v, any_parent_on);
      clique.base[cfg] *= self_on ? p_on : 1.0 - p_on;
    }
  }
}

PosteriorReport JunctionTree::infer(const std::vector<EvidenceFactor>& evidence,
                                    const std::string& instance_id) const {
  const int m = static_cast<int>(cliques_.size());
  double log_evidence = 0.0;

  std::vector<std::vector<double>> tables(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) tables[static_cast<std::size_t>(c)] = cliques_[static_cast<std::size_t>(c)].base;

  // Evidence factors are rescaled to max 1 before entering a table; the
  // scale moves into log_evidence, the marginals are unaffected.
  for (const auto& f : evidence) {
    check_evidence(net_, f);
    int v = net_.index_of(f.class_id);
    int home = home_clique_[static_cast<std::size_t>(v)];
    double scale = std::max(f.like_off, f.like_on);
    log_evidence += std::log(scale);
    double l0 = f.like_off / scale;
    double l1 = f.like_on / scale;
    auto& table = tables[static_cast<std::size_t>(home)];
    int pos = positions_of(cliques_[static_cast<std::size_t>(home)].nodes, {v})[0];
    for (std::size_t cfg = 0; cfg < table.size(); ++cfg) {
      table[cfg] *= ((cfg >> pos) & 1u) ? l1 : l0;
    }
  }

  // incoming[c][nb] = message from neighbor nb into clique c, over their sep.
  std::vector<std::map<int, std::vector<double>>> incoming(static_cast<std::size_t>(m));

  // Collect: children before parents.
  for (auto it = visit_order_.rbegin(); it != visit_order_.rend(); ++it) {
    int c = *it;
    int parent = links_[static_cast<std::size_t>(c)].from;
    if (parent < 0) continue;
    std::vector<double> prod = tables[static_cast<std::size_t>(c)];
    for (const auto& [nb, msg] : incoming[static_cast<std::size_t>(c)]) {
      multiply_in(prod, msg,
                  positions_of(cliques_[static_cast<std::size_t>(c)].nodes,
                               links_[static_cast<std::size_t>(nb == parent ? c : nb)].sep));
    }
    auto msg = marginalize(prod, positions_of(cliques_[static_cast<std::size_t>(c)].nodes,
                                              links_[static_cast<std::size_t>(c)].sep));
    double norm = normalize(msg);
    if (!(norm > 0.0)) {
      throw ValidationError("evidence has zero probability (instance " + instance_id + ")");
    }
    log_evidence += std::log(norm);
    incoming[static_cast<std::size_t>(parent)][c] = std::move(msg);
  }

  // Component roots close the collect pass and contribute their mass.
  for (int c : visit_order_) {
    if (links_[static_cast<std::size_t>(c)].from >= 0) continue;
    std::vector<double> prod = tables[static_cast<std::size_t>(c)];
    for (const auto& [nb, msg] : incoming[static_cast<std::size_t>(c)]) {
      multiply_in(prod, msg, positions_of(cliques_[static_cast<std::size_t>(c)].nodes,
                                          links_[static_cast<std::size_t>(nb)].sep));
    }
    double z = 0.0;
    for (double v : prod) z += v;
    if (!(z > 0.0)) {
      throw ValidationError("evidence has zero probability (instance " + instance_id + ")");
    }
    log_evidence += std::log(z);
  }

  // Distribute: parents before children; message to child d excludes d's own
  // upward message, so no division is needed and hard zeros stay safe.
  for (int c : visit_order_) {
    for (int d : cliques_[static_cast<std::size_t>(c)].neighbors) {
      if (links_[static_cast<std::size_t>(d)].from != c) continue;
      std::vector<double> prod = tables[static_cast<std::size_t>(c)];
      for (const auto& [nb, msg] : incoming[static_cast<std::size_t>(c)]) {
        if (nb == d) continue;
        multiply_in(prod, msg,
                    positions_of(cliques_[static_cast<std::size_t>(c)].nodes,
                                 links_[static_cast<std::size_t>(nb == links_[static_cast<std::size_t>(c)].from ? c : nb)].sep));
      }
      auto msg = marginalize(prod, positions_of(cliques_[static_cast<std::size_t>(c)].nodes,
                                                links_[static_cast<std::size_t>(d)].sep));
      normalize(msg);
      incoming[static_cast<std::size_t>(d)][c] = std::move(msg);
    }
  }

  PosteriorReport report;
  report.instance_id = instance_id;
  report.log_evidence = log_evidence;

  std::vector<std::vector<double>> beliefs(static_cast<std::size_t>(m));
  for (int c = 0; c < m; ++c) {
    beliefs[static_cast<std::size_t>(c)] = tables[static_cast<std::size_t>(c)];
    for (const auto& [nb, msg] : incoming[static_cast<std::size_t>(c)]) {
      multiply_in(beliefs[static_cast<std::size_t>(c)], msg,
                  positions_of(cliques_[static_cast<std::size_t>(c)].nodes,
                               links_[static_cast<std::size_t>(nb == links_[static_cast<std::size_t>(c)].from ? c : nb)].sep));
    }
  }
  for (int v = 0; v < net_.size(); ++v) {
    int h = home_clique_[static_cast<std::size_t>(v)];
    const auto& belief = beliefs[static_cast<std::size_t>(h)];
    int pos = positions_of(cliques_[static_cast<std::size_t>(h)].nodes, {v})[0];
    double on = 0.0, total = 0.0;
    for (std::size_t cfg = 0; cfg < belief.size(); ++cfg) {
      total += belief[cfg];
      if ((cfg >> pos) & 1u) on += belief[cfg];
    }
    report.marginal[net_.node_names()[static_cast<std::size_t>(v)]] = on / total;
  }
  return report;
}

PosteriorReport infer_marginals(const Network& net, const std::vector<EvidenceFactor>& evidence,
                                const std::string& instance_id, int treewidth_cap) {
  return JunctionTree(net, treewidth_cap).infer(evidence, instance_id);
}

PosteriorReport brute_force_marginals(const Network& net,
                                      const std::vector<EvidenceFactor>& evidence,
                                      const std::string& instance_id, int node_cap) {
  const int n = net.size();
  if (n > node_cap) {
    throw TooLargeError("brute-force enumeration over " + std::to_string(n) +
                        " nodes, cap is " + std::to_string(node_cap));
  }
  for (const auto& f : evidence) check_evidence(net, f);

  std::vector<double> on_mass(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  const std::size_t count = std::size_t{1} << n;
  for (std::size_t cfg = 0; cfg < count; ++cfg) {
    double p = 1.0;
    for (int v = 0; v < n && p > 0.0; ++v) {
      bool on = (cfg >> v) & 1u;
      bool any_parent_on = false;
      for (int u : net.model_parents(v)) {
        if ((cfg >> u) & 1u) {
          any_parent_on = true;
          break;
        }
      }
      double p_on = net.prob_on(v, any_parent_on);
      p *= on ? p_on : 1.0 - p_on;
    }
    if (p > 0.0) {
      for (const auto& f : evidence) {
        int v = net.index_of(f.class_id);
        p *= ((cfg >> v) & 1u) ? f.like_on : f.like_off;
      }
    }
    total += p;
    for (int v = 0; v < n; ++v) {
      if ((cfg >> v) & 1u) on_mass[static_cast<std::size_t>(v)] += p;
    }
  }
  if (!(total > 0.0)) {
    throw ValidationError("evidence has zero probability (instance " + instance_id + ")");
  }

  PosteriorReport report;
  report.instance_id = instance_id;
  report.log_evidence = std::log(total);
  for (int v = 0; v < n; ++v) {
    report.marginal[net.node_names()[static_cast<std::size_t>(v)]] =
        on_mass[static_cast<std::size_t>(v)] / total;
  }
  return report;
}

}  // namespace taxagg
