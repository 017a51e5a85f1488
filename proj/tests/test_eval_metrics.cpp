#include <doctest.h>

#include <cmath>

#include "taxagg/errors.hpp"
#include "taxagg/eval_metrics.hpp"
#include "test_util.hpp"

using namespace taxagg;
using namespace taxagg::testutil;

TEST_CASE("identity prediction scores perfectly") {
  Taxonomy t = animal_taxonomy();
  for (const ClassId& c : t.classes()) {
    LcaPrf m = lca_prf(t, c, c);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
  }
}

TEST_CASE("sibling leaves: hand-enumerated augmented paths") {
  Taxonomy t = animal_taxonomy();
  // lca(rottweiler, doberman) = working_dog;
  // predicted side {rottweiler, shepherd_dog, working_dog},
  // gold side {doberman, pinscher, watch_dog, working_dog}
  LcaPrf m = lca_prf(t, "rottweiler", "doberman");
  CHECK(m.precision == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(1.0 / 4.0).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("predicting an ancestor is precise but incomplete") {
  Taxonomy t = animal_taxonomy();
  LcaPrf m = lca_prf(t, "dog", "doberman");
  CHECK(m.precision == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(1.0 / 5.0).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("swapping prediction and gold swaps precision and recall") {
  Taxonomy t = animal_taxonomy();
  for (const ClassId& a : t.classes()) {
    for (const ClassId& b : t.classes()) {
      LcaPrf ab = lca_prf(t, a, b);
      LcaPrf ba = lca_prf(t, b, a);
      CHECK(ab.precision == doctest::Approx(ba.recall).epsilon(1e-12));
      CHECK(ab.recall == doctest::Approx(ba.precision).epsilon(1e-12));
      CHECK(ab.f1 == doctest::Approx(ba.f1).epsilon(1e-12));
    }
  }
}

TEST_CASE("ancestor predictions have unit precision; the dual holds for recall") {
  Taxonomy t = animal_taxonomy();
  for (const ClassId& gold : t.classes()) {
    Taxonomy::Index ig = t.index_of(gold);
    for (const ClassId& predicted : t.classes()) {
      Taxonomy::Index ip = t.index_of(predicted);
      LcaPrf m = lca_prf(t, predicted, gold);
      if (predicted == gold || t.is_ancestor(ip, ig)) {
        CHECK(m.precision == doctest::Approx(1.0).epsilon(1e-12));
      }
      if (predicted == gold || t.is_ancestor(ig, ip)) {
        CHECK(m.recall == doctest::Approx(1.0).epsilon(1e-12));
      }
      // harmonic-mean bounds
      CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-12);
      CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-12);
      CHECK(m.f1 >= 0.0);
    }
  }
}

TEST_CASE("disjoint roots score zero with a flag") {
  Taxonomy t = Taxonomy::from_edges({{"a", "b"}, {"c", "d"}});
  LcaPrf m = lca_prf(t, "a", "c");
  CHECK(m.no_common_ancestor);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("report aggregates mean and population stddev") {
  Taxonomy t = animal_taxonomy();

  std::map<std::string, ClassId> perfect = {{"i1", "fox"}, {"i2", "doberman"}};
  std::map<std::string, std::vector<ClassId>> gold_same = {{"i1", {"fox"}}, {"i2", {"doberman"}}};
  EvalReport all_right = evaluate(t, perfect, gold_same);
  CHECK(all_right.mean_precision == 1.0);
  CHECK(all_right.mean_recall == 1.0);
  CHECK(all_right.mean_f1 == 1.0);
  CHECK(all_right.std_f1 == 0.0);

  // one perfect, one sibling miss: F values 1 and 2/7
  std::map<std::string, ClassId> mixed = {{"i1", "doberman"}, {"i2", "rottweiler"}};
  std::map<std::string, std::vector<ClassId>> gold_mixed = {{"i1", {"doberman"}},
                                                            {"i2", {"doberman"}}};
  EvalReport r = evaluate(t, mixed, gold_mixed);
  CHECK(r.mean_f1 == doctest::Approx(9.0 / 14.0).epsilon(1e-12));
  CHECK(r.std_f1 == doctest::Approx(5.0 / 14.0).epsilon(1e-12));
}

TEST_CASE("evaluate validates its inputs") {
  Taxonomy t = animal_taxonomy();
  CHECK_THROWS_AS(evaluate(t, {}, {}), EmptyInputError);
  CHECK_THROWS_AS(evaluate(t, {{"i1", "fox"}}, {{"i2", {"fox"}}}), KeyMismatchError);
  CHECK_THROWS_AS(
      evaluate(t, {{"i1", "fox"}}, {{"i1", {"fox"}}, {"i2", {"cat"}}}), KeyMismatchError);
}

TEST_CASE("multi-label gold keeps the F-maximizing label and flags the row") {
  Taxonomy t = animal_taxonomy();
  std::map<std::string, ClassId> preds = {{"i1", "doberman"}};
  std::map<std::string, std::vector<ClassId>> golds = {{"i1", {"cat", "pinscher"}}};
  EvalReport r = evaluate(t, preds, golds);
  REQUIRE(r.per_instance.size() == 1);
  CHECK(r.per_instance[0].multi_gold);
  CHECK(r.any_multi_gold);
  CHECK(r.per_instance[0].gold_used == "pinscher");
  // doberman against pinscher: prediction one step below its gold ancestor
  CHECK(r.per_instance[0].precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.per_instance[0].recall == doctest::Approx(1.0).epsilon(1e-12));
}
