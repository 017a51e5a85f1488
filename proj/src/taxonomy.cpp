#include "taxagg/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <queue>
#include <set>

#include "taxagg/errors.hpp"

namespace taxagg {

namespace {

bool well_formed_id(const ClassId& id) {
  if (id.empty()) return false;
  for (unsigned char ch : id) {
    if (std::isspace(ch)) return false;
  }
  return true;
}

}  // namespace

bool Taxonomy::contains(const ClassId& c) const {
  return std::binary_search(names_.begin(), names_.end(), c);
}

Taxonomy::Index Taxonomy::index_of(const ClassId& c) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), c);
  if (it == names_.end() || *it != c) throw UnknownClassError(c);
  return static_cast<Index>(it - names_.begin());
}

bool Taxonomy::is_ancestor(Index anc, Index node) const {
  const auto& a = ancestors_[static_cast<std::size_t>(node)];
  return std::binary_search(a.begin(), a.end(), anc);
}

Taxonomy Taxonomy::from_edges(const std::vector<Edge>& edges) {
  if (edges.empty()) throw EmptyInputError("taxonomy edge list is empty");
  std::vector<ClassId> classes;
  for (const Edge& e : edges) {
    classes.push_back(e.child);
    classes.push_back(e.parent);
  }
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return from_parts(std::move(classes), edges);
}

Taxonomy Taxonomy::from_parts(std::vector<ClassId> classes, std::vector<Edge> edges) {
  Taxonomy t;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  for (const ClassId& c : classes) {
    if (!well_formed_id(c)) throw ValidationError("malformed class identifier: '" + c + "'");
  }
  t.names_ = std::move(classes);

  const auto n = t.names_.size();
  t.parents_.assign(n, {});
  t.children_.assign(n, {});

  std::sort(edges.begin(), edges.end());
  std::vector<Edge> unique_edges;
  for (const Edge& e : edges) {
    if (!unique_edges.empty() && unique_edges.back() == e) {
      t.warnings_.push_back("duplicate edge dropped: " + e.child + " -> " + e.parent);
      continue;
    }
    unique_edges.push_back(e);
  }
  for (const Edge& e : unique_edges) {
    if (e.child == e.parent) {
      throw CycleError("self edge: " + e.child + " -> " + e.parent);
    }
    Index c = t.index_of(e.child);
    Index p = t.index_of(e.parent);
    t.parents_[static_cast<std::size_t>(c)].push_back(p);
    t.children_[static_cast<std::size_t>(p)].push_back(c);
  }
  for (auto& v : t.parents_) std::sort(v.begin(), v.end());
  for (auto& v : t.children_) std::sort(v.begin(), v.end());

  t.finalize();
  return t;
}

void Taxonomy::finalize() {
  const int n = size();

  // Topological order over child->parent edges (children first). Kahn; the
  // leftover set on failure yields one concrete cycle for the error message.
  std::vector<int> pending(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) pending[static_cast<std::size_t>(i)] = static_cast<int>(children_[static_cast<std::size_t>(i)].size());
  std::vector<Index> order;
  std::queue<Index> ready;
  for (int i = 0; i < n; ++i) {
    if (pending[static_cast<std::size_t>(i)] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    Index v = ready.front();
    ready.pop();
    order.push_back(v);
    for (Index p : parents_[static_cast<std::size_t>(v)]) {
      if (--pending[static_cast<std::size_t>(p)] == 0) ready.push(p);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    Index start = -1;
    for (int i = 0; i < n; ++i) {
      if (pending[static_cast<std::size_t>(i)] > 0) { start = i; break; }
    }
    // Walk child edges within the unresolved set until a node repeats.
    std::vector<Index> trail;
    std::set<Index> seen;
    Index cur = start;
    while (seen.insert(cur).second) {
      trail.push_back(cur);
      for (Index ch : children_[static_cast<std::size_t>(cur)]) {
        if (pending[static_cast<std::size_t>(ch)] > 0) { cur = ch; break; }
      }
    }
    std::string msg = "cycle detected:";
    bool in_cycle = false;
    trail.push_back(cur);
    for (Index v : trail) {
      if (v == cur) in_cycle = true;
      if (in_cycle) msg += " " + name_of(v);
    }
    throw CycleError(msg);
  }

  // Closures in topological order; children of v are finalized before v.
  ancestors_.assign(static_cast<std::size_t>(n), {});
  descendants_.assign(static_cast<std::size_t>(n), {});
  for (Index v : order) {
    std::set<Index> acc;
    for (Index ch : children_[static_cast<std::size_t>(v)]) {
      acc.insert(ch);
      const auto& d = descendants_[static_cast<std::size_t>(ch)];
      acc.insert(d.begin(), d.end());
    }
    descendants_[static_cast<std::size_t>(v)].assign(acc.begin(), acc.end());
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Index v = *it;
    std::set<Index> acc;
    for (Index p : parents_[static_cast<std::size_t>(v)]) {
      acc.insert(p);
      const auto& a = ancestors_[static_cast<std::size_t>(p)];
      acc.insert(a.begin(), a.end());
    }
    ancestors_[static_cast<std::size_t>(v)].assign(acc.begin(), acc.end());
  }

  roots_.clear();
  leaves_.clear();
  for (int i = 0; i < n; ++i) {
    if (parents_[static_cast<std::size_t>(i)].empty()) roots_.push_back(i);
    if (children_[static_cast<std::size_t>(i)].empty()) leaves_.push_back(i);
  }

  // depth = longest path from any root, over the reversed topological order.
  depth_.assign(static_cast<std::size_t>(n), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Index v = *it;
    int d = 0;
    for (Index p : parents_[static_cast<std::size_t>(v)]) {
      d = std::max(d, depth_[static_cast<std::size_t>(p)] + 1);
    }
    depth_[static_cast<std::size_t>(v)] = d;
  }
}

std::vector<ClassId> Taxonomy::ancestor_names(const ClassId& c) const {
  std::vector<ClassId> out;
  for (Index i : ancestors(index_of(c))) out.push_back(name_of(i));
  return out;
}

std::vector<ClassId> Taxonomy::descendant_names(const ClassId& c) const {
  std::vector<ClassId> out;
  for (Index i : descendants(index_of(c))) out.push_back(name_of(i));
  return out;
}

std::vector<LabelPath> Taxonomy::root_paths(const ClassId& c, std::size_t cap) const {
  Index target = index_of(c);
  std::vector<std::vector<ClassId>> found;
  std::vector<Index> stack{target};

  // Enumerate upward simple paths; acyclicity bounds the recursion.
  auto expand = [&](auto&& self, Index v) -> void {
    const auto& ps = parents_[static_cast<std::size_t>(v)];
    if (ps.empty()) {
      std::vector<ClassId> path;
      for (auto it = stack.rbegin(); it != stack.rend(); ++it) path.push_back(name_of(*it));
      found.push_back(std::move(path));
      if (found.size() > cap) {
        throw PathExplosionError("more than " + std::to_string(cap) + " root paths for class '" +
                                 c + "'");
      }
      return;
    }
    for (Index p : ps) {
      stack.push_back(p);
      self(self, p);
      stack.pop_back();
    }
  };
  expand(expand, target);

  std::sort(found.begin(), found.end());
  std::vector<LabelPath> out;
  out.reserve(found.size());
  for (auto& nodes : found) out.push_back(LabelPath{std::move(nodes)});
  return out;
}

ClassId Taxonomy::lowest_common_ancestor(const ClassId& a, const ClassId& b) const {
  Index ia = index_of(a);
  Index ib = index_of(b);
  std::set<Index> ca(ancestors(ia).begin(), ancestors(ia).end());
  ca.insert(ia);
  std::set<Index> cb(ancestors(ib).begin(), ancestors(ib).end());
  cb.insert(ib);

  Index best = -1;
  for (Index v : ca) {
    if (!cb.count(v)) continue;
    if (best < 0 || depth(v) > depth(best) ||
        (depth(v) == depth(best) && name_of(v) < name_of(best))) {
      best = v;
    }
  }
  if (best < 0) throw NoCommonAncestorError(a, b);
  return name_of(best);
}

Taxonomy Taxonomy::induced_subgraph(const std::vector<ClassId>& seed) const {
  std::set<Index> keep;
  for (const ClassId& c : seed) {
    Index i = index_of(c);
    keep.insert(i);
    const auto& anc = ancestors(i);
    keep.insert(anc.begin(), anc.end());
  }
  std::vector<ClassId> classes;
  for (Index i : keep) classes.push_back(name_of(i));
  std::vector<Edge> edges;
  for (Index i : keep) {
    for (Index p : parents_[static_cast<std::size_t>(i)]) {
      if (keep.count(p)) edges.push_back(Edge{name_of(i), name_of(p)});
    }
  }
  return from_parts(std::move(classes), std::move(edges));
}

std::vector<Edge> Taxonomy::edge_list() const {
  std::vector<Edge> out;
  for (int i = 0; i < size(); ++i) {
    for (Index p : parents_[static_cast<std::size_t>(i)]) {
      out.push_back(Edge{name_of(i), name_of(p)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Taxonomy::valid_label_path(const LabelPath& path) const {
  if (path.nodes.empty()) return false;
  Index first = index_of(path.nodes.front());
  if (!parents_[static_cast<std::size_t>(first)].empty()) return false;
  for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
    Index up = index_of(path.nodes[k]);
    Index down = index_of(path.nodes[k + 1]);
    const auto& ps = parents_[static_cast<std::size_t>(down)];
    if (!std::binary_search(ps.begin(), ps.end(), up)) return false;
  }
  return true;
}

}  // namespace taxagg
