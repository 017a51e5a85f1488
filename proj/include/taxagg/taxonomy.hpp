#ifndef TAXAGG_TAXONOMY_HPP
#define TAXAGG_TAXONOMY_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace taxagg {

/// Opaque class identifier: a case-sensitive token without whitespace.
using ClassId = std::string;

/// One IS-A edge, oriented child -> parent.
struct Edge {
  ClassId child;
  ClassId parent;

  friend bool operator==(const Edge& a, const Edge& b) {
    return a.child == b.child && a.parent == b.parent;
  }
  friend bool operator<(const Edge& a, const Edge& b) {
    return a.child != b.child ? a.child < b.child : a.parent < b.parent;
  }
};

/// A root-to-terminal node sequence; the terminal need not be a leaf.
struct LabelPath {
  std::vector<ClassId> nodes;

  bool empty() const { return nodes.empty(); }
  const ClassId& terminal() const { return nodes.back(); }
  friend bool operator==(const LabelPath& a, const LabelPath& b) { return a.nodes == b.nodes; }
};

/// Immutable IS-A hierarchy (tree or DAG) with precomputed closures.
///
/// Classes are stored sorted lexicographically; every index-based accessor
/// uses positions in that order, so iteration is deterministic. All queries
/// are read-only and safe to call concurrently once construction is done.
class Taxonomy {
public:
  using Index = int;

  Taxonomy() = default;

  /// Builds from an edge list. Duplicate edges are dropped with a warning
  /// note; cycles and empty input are hard errors.
  static Taxonomy from_edges(const std::vector<Edge>& edges);

  /// Builds from an explicit class set plus edges among them. Permits
  /// isolated nodes, which the edge-list form cannot express.
  static Taxonomy from_parts(std::vector<ClassId> classes, std::vector<Edge> edges);

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<ClassId>& classes() const { return names_; }
  bool contains(const ClassId& c) const;
  Index index_of(const ClassId& c) const;  // throws UnknownClassError
  const ClassId& name_of(Index i) const { return names_[static_cast<std::size_t>(i)]; }

  const std::vector<Index>& parents(Index i) const { return parents_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& children(Index i) const { return children_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& ancestors(Index i) const { return ancestors_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& descendants(Index i) const { return descendants_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& roots() const { return roots_; }
  const std::vector<Index>& leaves() const { return leaves_; }

  /// Longest root-to-node path length in edges (0 for roots).
  int depth(Index i) const { return depth_[static_cast<std::size_t>(i)]; }

  bool is_ancestor(Index anc, Index node) const;

  std::vector<ClassId> ancestor_names(const ClassId& c) const;
  std::vector<ClassId> descendant_names(const ClassId& c) const;

  /// All simple root-to-c paths in lexicographic order of node sequences.
  /// Throws PathExplosionError once more than `cap` paths exist.
  std::vector<LabelPath> root_paths(const ClassId& c, std::size_t cap = 64) const;

  /// Deepest common ancestor of a and b (self counts); depth = longest root
  /// path, ties broken by lexicographically smallest ClassId.
  ClassId lowest_common_ancestor(const ClassId& a, const ClassId& b) const;

  /// Subgraph over seed plus all ancestors of seed, keeping every edge whose
  /// endpoints are both retained.
  Taxonomy induced_subgraph(const std::vector<ClassId>& seed) const;

  /// Canonical edge list, sorted lexicographically.
  std::vector<Edge> edge_list() const;

  /// Notes emitted during build (currently: deduplicated edges).
  const std::vector<std::string>& build_warnings() const { return warnings_; }

  /// True when `path` starts at a root and follows child edges downward.
  bool valid_label_path(const LabelPath& path) const;

  friend bool operator==(const Taxonomy& a, const Taxonomy& b) {
    return a.names_ == b.names_ && a.edge_list() == b.edge_list();
  }

private:
  void finalize();  // closures, roots/leaves, depth; throws CycleError

  std::vector<ClassId> names_;                     // sorted
  std::vector<std::vector<Index>> parents_;        // sorted index lists
  std::vector<std::vector<Index>> children_;
  std::vector<std::vector<Index>> ancestors_;
  std::vector<std::vector<Index>> descendants_;
  std::vector<Index> roots_;
  std::vector<Index> leaves_;
  std::vector<int> depth_;
  std::vector<std::string> warnings_;
};

}  // namespace taxagg

#endif
