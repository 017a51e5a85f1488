#include "taxagg/bayes_net.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "taxagg/errors.hpp"

namespace taxagg {

namespace {

constexpr double kScoreClamp = 1e-6;

double normal_pdf(double x, double mu, double sigma) {
  static const double inv_sqrt_2pi = 0.39894228040143267794;
  double t = (x - mu) / sigma;
  return inv_sqrt_2pi / sigma * std::exp(-0.5 * t * t);
}

}  // namespace

double transform_score(double y) {
  if (!std::isfinite(y)) throw NonFiniteError("score is not finite");
  double c = std::min(1.0 - kScoreClamp, std::max(kScoreClamp, y));
  return std::log(c / (1.0 - c));
}

double inverse_transform_score(double x) {
  return 1.0 / (1.0 + std::exp(-x));
}

EvidenceFactor score_evidence(const ObservationParams& obs, double observed) {
  if (!std::isfinite(observed)) {
    throw NonFiniteError("observed score for classifier " + obs.classifier_id + ", class " +
                         obs.class_id + " is not finite");
  }
  EvidenceFactor f;
  f.class_id = obs.class_id;
  if (const auto* bn = std::get_if<BinormalModel>(&obs.model)) {
    f.like_off = normal_pdf(observed, bn->mu_off, bn->sigma_off);
    f.like_on = normal_pdf(observed, bn->mu_on, bn->sigma_on);
  } else {
    const auto& d = std::get<DiscreteModel>(obs.model);
    if (observed != 0.0 && observed != 1.0) {
      throw InvalidScoreError("discrete hook " + obs.classifier_id + "/" + obs.class_id +
                              " expects a 0/1 vote, got " + std::to_string(observed));
    }
    if (observed == 1.0) {
      f.like_off = 1.0 - d.specificity;
      f.like_on = d.sensitivity;
    } else {
      f.like_off = d.specificity;
      f.like_on = 1.0 - d.sensitivity;
    }
  }
  return f;
}

Network build_network(const Taxonomy& full, const std::vector<ObservationParams>& models,
                      const NetworkConfig& cfg) {
  if (models.empty()) throw EmptyInputError("no observation models");

  std::vector<ClassId> modeled;
  for (const auto& m : models) {
    if (!full.contains(m.class_id)) throw UnknownClassError(m.class_id);
    modeled.push_back(m.class_id);
  }

  Network net;
  net.fanout_cap_ = cfg.fanout_cap;
  net.graph_ = full.induced_subgraph(modeled);
  const Taxonomy& g = net.graph_;
  const int n = g.size();

  // Prior mass of a node = total weight of full-taxonomy leaves at or below
  // it, normalized by the total leaf weight.
  auto leaf_weight = [&](Taxonomy::Index full_idx) {
    auto it = cfg.leaf_weight.find(full.name_of(full_idx));
    if (it == cfg.leaf_weight.end()) return 1.0;
    if (!(it->second > 0.0)) {
      throw ValidationError("leaf weight for " + full.name_of(full_idx) + " must be positive");
    }
    return it->second;
  };
  double total_mass = 0.0;
  for (Taxonomy::Index l : full.leaves()) total_mass += leaf_weight(l);

  net.node_leak_.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const ClassId& name = g.name_of(i);
    Taxonomy::Index fi = full.index_of(name);
    const auto& mp = g.children(i);

    if (mp.empty()) {
      if (auto it = cfg.prior_override.find(name); it != cfg.prior_override.end()) {
        if (it->second < 0.0 || it->second > 1.0) throw ValidationError("prior out of range for " + name);
        net.node_leak_[static_cast<std::size_t>(i)] = it->second;
        continue;
      }
      double mass = 0.0;
      const auto& full_leaves = full.leaves();
      if (std::binary_search(full_leaves.begin(), full_leaves.end(), fi)) mass += leaf_weight(fi);
      for (Taxonomy::Index d : full.descendants(fi)) {
        if (std::binary_search(full_leaves.begin(), full_leaves.end(), d)) mass += leaf_weight(d);
      }
      net.node_leak_[static_cast<std::size_t>(i)] = mass / total_mass;
    } else {
      if (auto it = cfg.leak_override.find(name); it != cfg.leak_override.end()) {
        if (it->second <= 0.0 || it->second >= 1.0) throw ValidationError("leak out of range for " + name);
        net.node_leak_[static_cast<std::size_t>(i)] = it->second;
        continue;
      }
      // Structural leak, calibrated for leaf-mass-uniform instances:
      // Pr[node holds | modeled children all absent] is the weight of its
      // uncovered leaf descendants over the weight of every leaf not covered
      // by those children, with half a pseudo-count of smoothing.
      std::set<Taxonomy::Index> covered;
      for (int k : mp) {
        Taxonomy::Index fk = full.index_of(g.name_of(k));
        covered.insert(fk);
        const auto& dd = full.descendants(fk);
        covered.insert(dd.begin(), dd.end());
      }
      const auto& full_leaves = full.leaves();
      double covered_mass = 0.0;
      for (Taxonomy::Index l : full_leaves) {
        if (covered.count(l)) covered_mass += leaf_weight(l);
      }
      double uncovered_under = 0.0;
      for (Taxonomy::Index d : full.descendants(fi)) {
        if (std::binary_search(full_leaves.begin(), full_leaves.end(), d) && !covered.count(d)) {
          uncovered_under += leaf_weight(d);
        }
      }
      net.node_leak_[static_cast<std::size_t>(i)] =
          (uncovered_under + 0.5) / (total_mass - covered_mass + 1.0);

      if (cfg.require_dense_tables && static_cast<int>(mp.size()) > cfg.fanout_cap) {
        throw FanoutError("node " + name + " has " + std::to_string(mp.size()) +
                          " model parents, above the dense-table cap of " +
                          std::to_string(cfg.fanout_cap));
      }
    }
  }

  net.hooks_ = models;
  std::sort(net.hooks_.begin(), net.hooks_.end(), [](const auto& a, const auto& b) {
    return a.classifier_id != b.classifier_id ? a.classifier_id < b.classifier_id
                                              : a.class_id < b.class_id;
  });
  for (const auto& h : net.hooks_) {
    if (const auto* bn = std::get_if<BinormalModel>(&h.model)) {
      if (!(bn->sigma_off > 0.0) || !(bn->sigma_on > 0.0)) {
        throw ValidationError("non-positive sigma in model for " + h.classifier_id + "/" +
                              h.class_id);
      }
    } else {
      const auto& d = std::get<DiscreteModel>(h.model);
      if (d.sensitivity <= 0.0 || d.sensitivity >= 1.0 || d.specificity <= 0.0 ||
          d.specificity >= 1.0) {
        throw ValidationError("discrete rates out of (0,1) for " + h.classifier_id + "/" +
                              h.class_id);
      }
    }
  }
  return net;
}

std::vector<double> Network::dense_table(int node) const {
  const auto& mp = model_parents(node);
  if (static_cast<int>(mp.size()) > fanout_cap_) {
    throw FanoutError("dense CPD for node " + node_names()[static_cast<std::size_t>(node)] +
                      " needs 2^" + std::to_string(mp.size()) + " rows, above the cap of 2^" +
                      std::to_string(fanout_cap_));
  }
  std::size_t rows = std::size_t{1} << mp.size();
  std::vector<double> table(rows);
  for (std::size_t cfg = 0; cfg < rows; ++cfg) {
    table[cfg] = prob_on(node, cfg != 0);
  }
  return table;
}

std::string debug_dump(const Network& net) {
  std::ostringstream os;
  os.precision(9);
  const Taxonomy& g = net.graph();
  os << "network nodes=" << net.size() << " hooks=" << net.hooks().size() << "\n";
  for (int i = 0; i < net.size(); ++i) {
    os << "node " << g.name_of(i);
    const auto& mp = net.model_parents(i);
    if (mp.empty()) {
      os << " prior=" << net.leak(i) << "\n";
      continue;
    }
    os << " parents=[";
    for (std::size_t k = 0; k < mp.size(); ++k) {
      os << (k ? "," : "") << g.name_of(mp[k]);
    }
    os << "]";
    if (static_cast<int>(mp.size()) <= net.fanout_cap()) {
      os << " cpd=[";
      auto table = net.dense_table(i);
      for (std::size_t r = 0; r < table.size(); ++r) os << (r ? "," : "") << table[r];
      os << "]\n";
    } else {
      os << " cpd=leaky-or(lambda=" << net.leak(i) << ")\n";
    }
  }
  for (const auto& h : net.hooks()) {
    os << "hook " << h.classifier_id << " " << h.class_id;
    if (const auto* bn = std::get_if<BinormalModel>(&h.model)) {
      os << " binormal " << bn->mu_off << " " << bn->sigma_off << " " << bn->mu_on << " "
         << bn->sigma_on;
    } else {
      const auto& d = std::get<DiscreteModel>(h.model);
      os << " discrete " << d.sensitivity << " " << d.specificity;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace taxagg
