#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "taxagg/errors.hpp"
#include "taxagg/estimation.hpp"
#include "taxagg/synthetic.hpp"
#include "test_util.hpp"

using namespace taxagg;
using namespace taxagg::testutil;

TEST_CASE("gold membership closes over ancestors") {
  Taxonomy t = animal_taxonomy();

  auto bits = gold_to_binary(t, ClassId("doberman"));
  int ones = 0;
  for (const auto& [c, z] : bits) {
    (void)c;
    ones += z;
  }
  CHECK(ones == 9);
  CHECK(bits.at("doberman") == 1);
  CHECK(bits.at("working_dog") == 1);
  CHECK(bits.at("canine") == 1);
  CHECK(bits.at("rottweiler") == 0);
  CHECK(bits.at("cat") == 0);
  CHECK(bits.at("fox") == 0);

  auto root_bits = gold_to_binary(t, ClassId("animal"));
  int root_ones = 0;
  for (const auto& [c, z] : root_bits) {
    (void)c;
    root_ones += z;
  }
  CHECK(root_ones == 1);

  // a DAG gold marks all parents
  auto dog_bits = gold_to_binary(t, ClassId("dog"));
  CHECK(dog_bits.at("domestic_animal") == 1);
  CHECK(dog_bits.at("canine") == 1);

  CHECK_THROWS_AS(gold_to_binary(t, ClassId("unicorn")), UnknownClassError);
}

TEST_CASE("binormal fit: zero-variance groups land on the floor") {
  BinormalFit fit = fit_binormal({{0.0, 0}, {0.0, 0}, {2.0, 1}, {2.0, 1}});
  CHECK(fit.model.mu_off == 0.0);
  CHECK(fit.model.sigma_off == 1e-3);
  CHECK(fit.model.mu_on == 2.0);
  CHECK(fit.model.sigma_on == 1e-3);
  CHECK(!fit.fallback);
}

TEST_CASE("binormal fit: hand-computed group statistics") {
  BinormalFit fit = fit_binormal({{-1.0, 0}, {1.0, 0}, {4.0, 1}, {6.0, 1}});
  CHECK(fit.model.mu_off == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.model.sigma_off == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.model.mu_on == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(fit.model.sigma_on == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("binormal fit: identical groups carry no signal") {
  BinormalFit fit = fit_binormal({{0.3, 0}, {-0.3, 0}, {0.3, 1}, {-0.3, 1}});
  CHECK(fit.model.mu_off == fit.model.mu_on);
  CHECK(fit.model.sigma_off == fit.model.sigma_on);
}

TEST_CASE("binormal fit: insufficient data falls back to pooled defaults") {
  BinormalFit fit = fit_binormal({{1.0, 0}, {3.0, 0}, {5.0, 1}});
  CHECK(fit.fallback);
  CHECK(fit.model.mu_off == doctest::Approx(2.0).epsilon(1e-12));  // pooled mean 3, minus 1
  CHECK(fit.model.mu_on == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(fit.model.sigma_off == fit.model.sigma_on);
  CHECK(fit.model.sigma_off ==
        doctest::Approx(std::sqrt((4.0 + 0.0 + 4.0) / 3.0)).epsilon(1e-12));
  CHECK_THROWS_AS(fit_binormal({}), InsufficientDataError);
}

TEST_CASE("binormal fit is order invariant, bit for bit") {
  std::vector<std::pair<double, int>> samples;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 40; ++i) samples.emplace_back(u(gen), i % 2);

  BinormalFit a = fit_binormal(samples);
  std::shuffle(samples.begin(), samples.end(), gen);
  BinormalFit b = fit_binormal(samples);
  CHECK(a.model.mu_off == b.model.mu_off);
  CHECK(a.model.sigma_off == b.model.sigma_off);
  CHECK(a.model.mu_on == b.model.mu_on);
  CHECK(a.model.sigma_on == b.model.sigma_on);
}

TEST_CASE("discrete fit: counting with and without smoothing") {
  // ten perfect votes
  std::vector<std::pair<int, int>> perfect;
  for (int i = 0; i < 5; ++i) {
    perfect.emplace_back(1, 1);
    perfect.emplace_back(0, 0);
  }
  DiscreteFit exact = fit_discrete(perfect, 0.0);
  CHECK(exact.model.sensitivity == 1.0);
  CHECK(exact.model.specificity == 1.0);

  // no positives at all: smoothing pulls to one half
  DiscreteFit empty = fit_discrete({{0, 0}, {1, 0}}, 1.0);
  CHECK(empty.model.sensitivity == 0.5);

  // 8/10 correct positives, 9/10 correct negatives
  std::vector<std::pair<int, int>> mixed;
  for (int i = 0; i < 10; ++i) mixed.emplace_back(i < 8 ? 1 : 0, 1);
  for (int i = 0; i < 10; ++i) mixed.emplace_back(i < 9 ? 0 : 1, 0);
  DiscreteFit m = fit_discrete(mixed, 0.0);
  CHECK(m.model.sensitivity == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.model.specificity == doctest::Approx(0.9).epsilon(1e-12));
}

namespace {

// Small mixed-kind fixture with enough coverage per hook side.
struct Fixture {
  Taxonomy t = Taxonomy::from_edges({{"b", "a"}, {"c", "a"}, {"d", "b"}, {"e", "b"}});
  std::vector<ScoreSheet> sheets;
  std::map<std::string, std::vector<ClassId>> golds;

  Fixture() {
    Rng rng(77);
    std::vector<ClassId> leaves = {"c", "d", "e"};
    for (int i = 0; i < 40; ++i) {
      std::string id = "i" + std::to_string(100 + i);
      ClassId gold = leaves[static_cast<std::size_t>(rng.uniform_int(0, 2))];
      golds[id] = {gold};
      auto bits = gold_to_binary(t, gold);
      ScoreSheet sheet;
      sheet.instance_id = id;
      for (const ClassId& c : {ClassId("b"), ClassId("d"), ClassId("e")}) {
        double x = bits.at(c) ? rng.normal(1.2, 0.8) : rng.normal(-1.2, 0.8);
        sheet.scores["g0"][c] = inverse_transform_score(x);
      }
      for (const ClassId& c : {ClassId("b"), ClassId("c")}) {
        bool vote = bits.at(c) ? rng.bernoulli(0.85) : rng.bernoulli(0.1);
        sheet.scores["v0"][c] = vote ? 1.0 : 0.0;
      }
      sheets.push_back(std::move(sheet));
    }
  }
};

}  // namespace

TEST_CASE("supervised fit covers every hook and matches direct fits") {
  Fixture fx;
  auto binormal_hooks = fit_from_validation(fx.t, fx.sheets, fx.golds, FitKind::binormal);
  // v0 votes are 0/1 and valid under the binormal path too; five hooks total
  CHECK(binormal_hooks.size() == 5);

  // direct refit of one hook agrees
  std::vector<std::pair<double, int>> samples;
  for (const auto& sheet : fx.sheets) {
    auto bits = gold_to_binary(fx.t, fx.golds.at(sheet.instance_id));
    samples.emplace_back(transform_score(sheet.scores.at("g0").at("d")), bits.at("d"));
  }
  BinormalFit direct = fit_binormal(samples);
  for (const auto& p : binormal_hooks) {
    if (p.classifier_id == "g0" && p.class_id == "d") {
      const auto& m = std::get<BinormalModel>(p.model);
      CHECK(m.mu_off == direct.model.mu_off);
      CHECK(m.mu_on == direct.model.mu_on);
    }
  }
}

TEST_CASE("one M-step under gold-clamped labels reproduces the supervised fits") {
  Fixture fx;

  // mixed kinds: binormal models for g0 hooks, discrete for v0 hooks
  std::vector<ObservationParams> init;
  for (const ClassId& c : {ClassId("b"), ClassId("d"), ClassId("e")}) {
    init.push_back({"g0", c, BinormalModel{}});
  }
  for (const ClassId& c : {ClassId("b"), ClassId("c")}) {
    init.push_back({"v0", c, DiscreteModel{0.6, 0.6}});
  }

  SoftLabels clamped;
  for (const auto& sheet : fx.sheets) {
    auto bits = gold_to_binary(fx.t, fx.golds.at(sheet.instance_id));
    for (const auto& [c, z] : bits) clamped.q[sheet.instance_id][c] = static_cast<double>(z);
  }

  auto stepped = em_m_step(init, fx.sheets, clamped);

  // supervised references, built per kind on the same sheets
  std::map<std::pair<std::string, ClassId>, BinormalFit> gaussian_ref;
  std::map<std::pair<std::string, ClassId>, DiscreteFit> vote_ref;
  for (const auto& hook : init) {
    std::vector<std::pair<double, int>> gsamples;
    std::vector<std::pair<int, int>> vsamples;
    for (const auto& sheet : fx.sheets) {
      auto it = sheet.scores.find(hook.classifier_id);
      if (it == sheet.scores.end() || !it->second.count(hook.class_id)) continue;
      double score = it->second.at(hook.class_id);
      int z = gold_to_binary(fx.t, fx.golds.at(sheet.instance_id)).at(hook.class_id);
      gsamples.emplace_back(transform_score(score), z);
      vsamples.emplace_back(score == 1.0 ? 1 : 0, z);
    }
    if (hook.is_binormal()) {
      gaussian_ref[{hook.classifier_id, hook.class_id}] = fit_binormal(gsamples);
    } else {
      vote_ref[{hook.classifier_id, hook.class_id}] = fit_discrete(vsamples);
    }
  }

  for (const auto& p : stepped) {
    if (p.is_binormal()) {
      const auto& got = std::get<BinormalModel>(p.model);
      const auto& ref = gaussian_ref.at({p.classifier_id, p.class_id}).model;
      CHECK(std::abs(got.mu_off - ref.mu_off) <= 1e-12);
      CHECK(std::abs(got.sigma_off - ref.sigma_off) <= 1e-12);
      CHECK(std::abs(got.mu_on - ref.mu_on) <= 1e-12);
      CHECK(std::abs(got.sigma_on - ref.sigma_on) <= 1e-12);
    } else {
      const auto& got = std::get<DiscreteModel>(p.model);
      const auto& ref = vote_ref.at({p.classifier_id, p.class_id}).model;
      CHECK(std::abs(got.sensitivity - ref.sensitivity) <= 1e-12);
      CHECK(std::abs(got.specificity - ref.specificity) <= 1e-12);
    }
  }
}

TEST_CASE("EM log-evidence never decreases") {
  Fixture fx;
  EmOptions opts;
  opts.max_iters = 15;
  opts.tol = 1e-9;
  EmResult result = em_fit(fx.t, fx.sheets, default_em_init(fx.sheets), opts);
  REQUIRE(result.log_likelihood.size() >= 2);
  for (std::size_t i = 1; i < result.log_likelihood.size(); ++i) {
    CHECK(result.log_likelihood[i] >= result.log_likelihood[i - 1] - 1e-8);
  }
}

TEST_CASE("abstaining classifiers contribute no weight") {
  Taxonomy t = Taxonomy::from_edges({{"b", "a"}});
  std::vector<ScoreSheet> sheets(2);
  sheets[0].instance_id = "i0";
  sheets[0].scores["f"]["b"] = 0.9;
  sheets[1].instance_id = "i1";  // the classifier abstains here
  sheets[1].scores["g"]["b"] = 0.2;

  EmOptions opts;
  opts.max_iters = 2;
  EmResult result = em_fit(t, sheets, default_em_init(sheets), opts);
  const auto& counts = result.effective_counts.at({"f", "b"});
  CHECK(counts.count_on + counts.count_off == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("EM on generated data recovers the generating means") {
  GenConfig cfg;
  cfg.seed = 2024;
  cfg.depth = 2;
  cfg.branch_min = 2;
  cfg.branch_max = 3;
  cfg.extra_parent_prob = 0.1;
  cfg.num_classifiers = 4;
  cfg.classes_per_classifier = 5;
  cfg.num_instances = 250;
  cfg.true_model = BinormalModel{-1.0, 0.5, 1.0, 0.5};

  Taxonomy t = gen_taxonomy(cfg);
  SimData sim = gen_instances(cfg, t);

  EmOptions opts;
  opts.max_iters = 30;
  opts.tol = 1e-6;
  EmResult result = em_fit(t, sim.sheets, default_em_init(sim.sheets), opts);

  int checked = 0;
  for (const auto& p : result.params) {
    const auto& counts = result.effective_counts.at({p.classifier_id, p.class_id});
    const auto& m = std::get<BinormalModel>(p.model);
    if (counts.count_on >= 20.0) {
      CHECK(std::abs(m.mu_on - cfg.true_model.mu_on) <= 0.3);
      ++checked;
    }
    if (counts.count_off >= 20.0) {
      CHECK(std::abs(m.mu_off - cfg.true_model.mu_off) <= 0.3);
      ++checked;
    }
  }
  CHECK(checked > 10);
}
