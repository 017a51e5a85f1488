#include "taxagg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "taxagg/errors.hpp"
#include "taxagg/estimation.hpp"

namespace taxagg {

namespace {

constexpr std::uint64_t kInstanceStreamSalt = 0x9e3779b97f4a7c15ull;

std::string padded(const char* prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, value);
  return buf;
}

}  // namespace

int Rng::uniform_int(int lo, int hi) {
  double u = uniform01();
  int span = hi - lo + 1;
  int v = lo + static_cast<int>(u * span);
  return std::min(v, hi);
}

double Rng::normal(double mu, double sigma) {
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  return mu + sigma * r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

Taxonomy gen_taxonomy(const GenConfig& cfg) {
  if (cfg.depth < 1 || cfg.branch_min < 1 || cfg.branch_max < cfg.branch_min) {
    throw ValidationError("invalid taxonomy shape configuration");
  }
  Rng rng(cfg.seed);

  std::vector<Edge> edges;
  std::vector<std::string> previous_level{"n0000"};
  int counter = 1;
  for (int level = 1; level <= cfg.depth; ++level) {
    std::vector<std::string> current;
    std::vector<std::string> primary_of;
    for (const std::string& parent : previous_level) {
      int fanout = rng.uniform_int(cfg.branch_min, cfg.branch_max);
      for (int b = 0; b < fanout; ++b) {
        std::string node = padded("n", counter++, 4);
        edges.push_back(Edge{node, parent});
        current.push_back(node);
        primary_of.push_back(parent);
      }
    }
    // Extra parents come from the rest of the previous level.
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (previous_level.size() < 2) break;
      if (!rng.bernoulli(cfg.extra_parent_prob)) continue;
      std::vector<std::string> eligible;
      for (const std::string& p : previous_level) {
        if (p != primary_of[i]) eligible.push_back(p);
      }
      const std::string& extra = eligible[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(eligible.size()) - 1))];
      edges.push_back(Edge{current[i], extra});
    }
    previous_level = std::move(current);
  }
  return Taxonomy::from_edges(edges);
}

SimData gen_instances(const GenConfig& cfg, const Taxonomy& t) {
  if (cfg.num_classifiers < 1 || cfg.classes_per_classifier < 1 || cfg.num_instances < 1) {
    throw ValidationError("invalid ensemble configuration");
  }
  Rng rng(cfg.seed ^ kInstanceStreamSalt);

  // Classifier subsets: distinct non-root classes, partial Fisher-Yates.
  std::vector<ClassId> pool;
  for (const ClassId& c : t.classes()) {
    Taxonomy::Index i = t.index_of(c);
    if (!t.parents(i).empty()) pool.push_back(c);
  }
  int subset_size = std::min<int>(cfg.classes_per_classifier, static_cast<int>(pool.size()));

  SimData sim;
  sim.rng_name = Rng::stream_name();
  std::vector<std::vector<ClassId>> subsets;
  for (int j = 0; j < cfg.num_classifiers; ++j) {
    std::vector<ClassId> deck = pool;
    for (int k = 0; k < subset_size; ++k) {
      int pick = rng.uniform_int(k, static_cast<int>(deck.size()) - 1);
      std::swap(deck[static_cast<std::size_t>(k)], deck[static_cast<std::size_t>(pick)]);
    }
    deck.resize(static_cast<std::size_t>(subset_size));
    std::sort(deck.begin(), deck.end());
    subsets.push_back(deck);

    std::string classifier = padded("f", j, 2);
    for (const ClassId& c : deck) {
      sim.true_params.push_back(ObservationParams{classifier, c, cfg.true_model});
    }
  }

  const auto& leaf_indices = t.leaves();
  int digits = cfg.num_instances > 9999 ? 6 : 4;
  for (int i = 0; i < cfg.num_instances; ++i) {
    std::string instance = padded("i", i, digits);
    ClassId gold = t.name_of(leaf_indices[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(leaf_indices.size()) - 1))]);
    sim.golds[instance] = gold;
    auto bits = gold_to_binary(t, gold);

    ScoreSheet sheet;
    sheet.instance_id = instance;
    for (int j = 0; j < cfg.num_classifiers; ++j) {
      std::string classifier = padded("f", j, 2);
      for (const ClassId& c : subsets[static_cast<std::size_t>(j)]) {
        bool on = bits.at(c) == 1;
        double x = on ? rng.normal(cfg.true_model.mu_on, cfg.true_model.sigma_on)
                      : rng.normal(cfg.true_model.mu_off, cfg.true_model.sigma_off);
        sheet.scores[classifier][c] = inverse_transform_score(x);
      }
    }
    sim.sheets.push_back(std::move(sheet));
  }
  return sim;
}

}  // namespace taxagg
