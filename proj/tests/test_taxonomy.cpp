#include <doctest.h>

#include <algorithm>
#include <set>

#include "taxagg/errors.hpp"
#include "taxagg/taxonomy.hpp"
#include "test_util.hpp"

using namespace taxagg;
using namespace taxagg::testutil;

TEST_CASE("build accepts the animal DAG and finds both parents of dog") {
  Taxonomy t = animal_taxonomy();
  CHECK(t.size() == 19);
  CHECK(t.roots().size() == 1);
  CHECK(t.name_of(t.roots()[0]) == "animal");

  std::set<ClassId> dog_parents;
  for (auto p : t.parents(t.index_of("dog"))) dog_parents.insert(t.name_of(p));
  CHECK(dog_parents == std::set<ClassId>{"canine", "domestic_animal"});

  std::set<ClassId> leaves;
  for (auto l : t.leaves()) leaves.insert(t.name_of(l));
  CHECK(leaves ==
        std::set<ClassId>{"bluetick", "doberman", "domestic_cat", "fox", "rottweiler", "wild_cat"});
}

TEST_CASE("single-edge taxonomy") {
  Taxonomy t = Taxonomy::from_edges({{"a", "b"}});
  CHECK(t.size() == 2);
  CHECK(t.name_of(t.roots()[0]) == "b");
  CHECK(t.name_of(t.leaves()[0]) == "a");
  CHECK(t.ancestor_names("a") == std::vector<ClassId>{"b"});
}

TEST_CASE("cycles are rejected") {
  CHECK_THROWS_AS(Taxonomy::from_edges({{"a", "b"}, {"b", "a"}}), CycleError);
  CHECK_THROWS_AS(Taxonomy::from_edges({{"a", "b"}, {"b", "c"}, {"c", "a"}}), CycleError);
  CHECK_THROWS_AS(Taxonomy::from_edges({{"a", "a"}}), CycleError);
}

TEST_CASE("empty input and duplicate edges") {
  CHECK_THROWS_AS(Taxonomy::from_edges({}), EmptyInputError);
  Taxonomy t = Taxonomy::from_edges({{"a", "b"}, {"a", "b"}});
  CHECK(t.build_warnings().size() == 1);
  CHECK(t.edge_list().size() == 1);
}

TEST_CASE("malformed identifiers are rejected") {
  CHECK_THROWS_AS(Taxonomy::from_edges({{"a b", "c"}}), ValidationError);
  CHECK_THROWS_AS(Taxonomy::from_edges({{"", "c"}}), ValidationError);
}

TEST_CASE("ancestor closures match the breadth-first oracle") {
  auto edges = animal_edges();
  Taxonomy t = Taxonomy::from_edges(edges);
  for (const ClassId& c : t.classes()) {
    std::set<ClassId> expected = bfs_ancestors(edges, c);
    std::set<ClassId> got;
    for (const ClassId& a : t.ancestor_names(c)) got.insert(a);
    CHECK(got == expected);
  }
  // spot values
  CHECK(bfs_ancestors(edges, "doberman") ==
        std::set<ClassId>{"pinscher", "watch_dog", "working_dog", "dog", "domestic_animal",
                          "canine", "carnivore", "animal"});
  CHECK(t.ancestor_names("animal").empty());
  CHECK(bfs_ancestors(edges, "dog") ==
        std::set<ClassId>{"domestic_animal", "canine", "carnivore", "animal"});
}

TEST_CASE("ancestors and descendants are duals") {
  Rng rng(7);
  for (int round = 0; round < 30; ++round) {
    Taxonomy t = random_taxonomy(rng, rng.uniform_int(2, 14));
    for (int a = 0; a < t.size(); ++a) {
      for (int b = 0; b < t.size(); ++b) {
        bool a_above_b = std::binary_search(t.ancestors(b).begin(), t.ancestors(b).end(), a);
        bool b_below_a = std::binary_search(t.descendants(a).begin(), t.descendants(a).end(), b);
        CHECK(a_above_b == b_below_a);
      }
    }
  }
}

TEST_CASE("root paths of a multi-parent class") {
  Taxonomy t = animal_taxonomy();
  auto paths = t.root_paths("doberman");
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].nodes == std::vector<ClassId>{"animal", "carnivore", "canine", "dog",
                                               "working_dog", "watch_dog", "pinscher",
                                               "doberman"});
  CHECK(paths[1].nodes == std::vector<ClassId>{"animal", "domestic_animal", "dog", "working_dog",
                                               "watch_dog", "pinscher", "doberman"});

  auto root_only = t.root_paths("animal");
  REQUIRE(root_only.size() == 1);
  CHECK(root_only[0].nodes == std::vector<ClassId>{"animal"});
}

TEST_CASE("pure trees have exactly one root path per class") {
  Taxonomy t = Taxonomy::from_edges({{"b", "a"}, {"c", "a"}, {"d", "b"}, {"e", "b"}});
  for (const ClassId& c : t.classes()) {
    CHECK(t.root_paths(c).size() == 1);
  }
}

TEST_CASE("root path enumeration respects the cap") {
  // A ladder of diamonds doubles the path count per rung.
  std::vector<Edge> edges;
  for (int i = 0; i < 7; ++i) {
    std::string top = "t" + std::to_string(i);
    std::string bottom = "t" + std::to_string(i + 1);
    std::string left = "l" + std::to_string(i);
    std::string right = "r" + std::to_string(i);
    edges.push_back({left, top});
    edges.push_back({right, top});
    edges.push_back({bottom, left});
    edges.push_back({bottom, right});
  }
  Taxonomy t = Taxonomy::from_edges(edges);
  CHECK_THROWS_AS(t.root_paths("t7", 64), PathExplosionError);
  CHECK(t.root_paths("t7", 128).size() == 128);
}

TEST_CASE("root path node sets union to the ancestor closure") {
  Rng rng(11);
  for (int round = 0; round < 20; ++round) {
    Taxonomy t = random_taxonomy(rng, rng.uniform_int(2, 10));
    for (const ClassId& c : t.classes()) {
      std::set<ClassId> from_paths;
      for (const LabelPath& p : t.root_paths(c, 4096)) {
        from_paths.insert(p.nodes.begin(), p.nodes.end());
      }
      std::set<ClassId> expected{c};
      for (const ClassId& a : t.ancestor_names(c)) expected.insert(a);
      CHECK(from_paths == expected);
    }
  }
}

TEST_CASE("lowest common ancestor on the animal DAG") {
  Taxonomy t = animal_taxonomy();
  CHECK(t.lowest_common_ancestor("doberman", "rottweiler") == "working_dog");
  CHECK(t.lowest_common_ancestor("fox", "cat") == "carnivore");
  for (const ClassId& c : t.classes()) {
    CHECK(t.lowest_common_ancestor(c, c) == c);
  }
  // symmetric in its arguments
  for (const ClassId& a : t.classes()) {
    for (const ClassId& b : t.classes()) {
      CHECK(t.lowest_common_ancestor(a, b) == t.lowest_common_ancestor(b, a));
    }
  }
}

TEST_CASE("disjoint roots have no common ancestor") {
  Taxonomy t = Taxonomy::from_edges({{"a", "b"}, {"c", "d"}});
  CHECK_THROWS_AS(t.lowest_common_ancestor("a", "c"), NoCommonAncestorError);
}

TEST_CASE("depth uses the longest root path") {
  Taxonomy t = animal_taxonomy();
  CHECK(t.depth(t.index_of("animal")) == 0);
  CHECK(t.depth(t.index_of("carnivore")) == 1);
  CHECK(t.depth(t.index_of("canine")) == 2);
  // via canine the dog path is longer than via domestic_animal
  CHECK(t.depth(t.index_of("dog")) == 3);
  CHECK(t.depth(t.index_of("working_dog")) == 4);
  CHECK(t.depth(t.index_of("doberman")) == 7);
}

TEST_CASE("induced subgraph keeps seeds, ancestors, and their edges") {
  Taxonomy t = animal_taxonomy();
  Taxonomy sub = t.induced_subgraph({"dog", "fox", "cat", "doberman", "rottweiler"});
  CHECK(sub.size() == 14);
  std::set<ClassId> kept(sub.classes().begin(), sub.classes().end());
  CHECK(kept == std::set<ClassId>{"animal", "canine", "carnivore", "cat", "doberman", "dog",
                                  "domestic_animal", "feline", "fox", "pinscher", "rottweiler",
                                  "shepherd_dog", "watch_dog", "working_dog"});
  // both parent edges of dog survive
  std::set<ClassId> dog_parents;
  for (auto p : sub.parents(sub.index_of("dog"))) dog_parents.insert(sub.name_of(p));
  CHECK(dog_parents == std::set<ClassId>{"canine", "domestic_animal"});

  CHECK(t.induced_subgraph({"animal"}).size() == 1);

  std::vector<ClassId> all_leaves;
  for (auto l : t.leaves()) all_leaves.push_back(t.name_of(l));
  CHECK(t.induced_subgraph(all_leaves) == t);
}

TEST_CASE("induced subgraph is idempotent") {
  Rng rng(23);
  for (int round = 0; round < 20; ++round) {
    Taxonomy t = random_taxonomy(rng, rng.uniform_int(2, 12));
    std::vector<ClassId> seed;
    for (const ClassId& c : t.classes()) {
      if (rng.bernoulli(0.4)) seed.push_back(c);
    }
    if (seed.empty()) seed.push_back(t.classes().front());
    Taxonomy once = t.induced_subgraph(seed);
    Taxonomy twice = once.induced_subgraph(seed);
    CHECK(once == twice);
  }
}

TEST_CASE("unknown classes are reported") {
  Taxonomy t = animal_taxonomy();
  CHECK_THROWS_AS(t.index_of("unicorn"), UnknownClassError);
  CHECK_THROWS_AS(t.root_paths("unicorn"), UnknownClassError);
  CHECK_THROWS_AS(t.induced_subgraph({"unicorn"}), UnknownClassError);
}

TEST_CASE("label path validation") {
  Taxonomy t = animal_taxonomy();
  CHECK(t.valid_label_path(LabelPath{{"animal", "carnivore", "canine", "dog"}}));
  CHECK(!t.valid_label_path(LabelPath{{"carnivore", "canine"}}));     // not from a root
  CHECK(!t.valid_label_path(LabelPath{{"animal", "canine"}}));        // skips a level
  CHECK(!t.valid_label_path(LabelPath{{}}));
}
