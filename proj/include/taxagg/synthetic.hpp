#ifndef TAXAGG_SYNTHETIC_HPP
#define TAXAGG_SYNTHETIC_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "taxagg/bayes_net.hpp"
#include "taxagg/score_sheet.hpp"
#include "taxagg/taxonomy.hpp"

namespace taxagg {

/// Seeded generator with hand-rolled derivations on top of the standard
/// mt19937_64 stream, so one seed yields one byte stream on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1), 53 bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Box-Muller from two fresh uniforms; no spare caching.
  double normal(double mu, double sigma);

  static const char* stream_name() { return "mt19937_64+box-muller"; }

private:
  std::mt19937_64 gen_;
};

struct GenConfig {
  std::uint64_t seed = 1;

  // taxonomy shape
  int depth = 3;                    // levels below the root
  int branch_min = 2;
  int branch_max = 4;
  double extra_parent_prob = 0.1;   // chance a node gains a second parent

  // ensemble shape
  int num_classifiers = 10;
  int classes_per_classifier = 10;
  int num_instances = 500;

  // generating observation model, shared by every (classifier, class) hook
  BinormalModel true_model{-0.5, 1.0, 0.5, 1.0};
};

/// Random rooted DAG: level-by-level expansion with optional extra parents
/// drawn from the previous level. Deterministic per seed.
Taxonomy gen_taxonomy(const GenConfig& cfg);

struct SimData {
  std::vector<ObservationParams> true_params;   // one hook per (classifier, class)
  std::map<std::string, ClassId> golds;         // instance -> leaf
  std::vector<ScoreSheet> sheets;               // sorted by instance id
  std::string rng_name;
};

/// Gold leaves drawn uniformly; each hook's score drawn from the generating
/// model conditioned on the gold's membership bit, then mapped back to
/// probability space. Uses an independent sub-stream of cfg.seed so taxonomy
/// and instance draws do not interleave.
SimData gen_instances(const GenConfig& cfg, const Taxonomy& t);

}  // namespace taxagg

#endif
