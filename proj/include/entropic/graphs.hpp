#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "entropic/rng.hpp"

namespace entropic {

using Edge = std::pair<int, int>;

// Directed acyclic graph over named nodes. Acyclicity is checked on
// construction; edges are kept sorted.
class Dag {
 public:
  Dag() = default;
  Dag(std::vector<std::string> names, std::vector<Edge> edges);
  // Nodes named X0, X1, ...
  Dag(std::size_t n, std::vector<Edge> edges);

  std::size_t num_nodes() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& parents(int v) const { return parents_[v]; }
  const std::vector<int>& children(int v) const { return children_[v]; }
  bool has_edge(int from, int to) const;
  bool adjacent(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }

  // Nodes reachable from v by a directed path, excluding v.
  std::vector<bool> descendants(int v) const;
  std::vector<bool> ancestors(int v) const;
  std::vector<int> sources() const;

  friend bool operator==(const Dag& a, const Dag& b) { return a.names_ == b.names_ && a.edges_ == b.edges_; }

 private:
  std::vector<std::string> names_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
};

// Undirected adjacency structure; links stored as (min, max), sorted.
class Skeleton {
 public:
  Skeleton() = default;
  Skeleton(std::vector<std::string> names, std::vector<Edge> links);
  explicit Skeleton(const Dag& g);

  std::size_t num_nodes() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Edge>& links() const { return links_; }
  std::vector<int> neighbors(int v) const;
  bool has_link(int a, int b) const;

  friend bool operator==(const Skeleton& a, const Skeleton& b) {
    return a.names_ == b.names_ && a.links_ == b.links_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Edge> links_;
};

// Kahn's algorithm, smallest ready index first.
std::vector<int> topological_order(const Dag& g);

bool d_separated(const Dag& g, int i, int j, const std::vector<int>& cond);

// Adjacencies present in exactly one graph plus reversed adjacencies; each
// counts 1.
int shd(const Dag& a, const Dag& b);

// One bit per skeleton link in link order: 0 = (lo -> hi), 1 = (hi -> lo).
std::vector<bool> orientation_bits(const Dag& g, const Skeleton& s);
Dag orient(const Skeleton& s, const std::vector<bool>& bits);

// All acyclic orientations in lexicographic order of their bit vectors.
// Throws TooManyOrientations once more than `cap` exist.
std::vector<Dag> enumerate_orientations(const Skeleton& s, std::size_t cap = 1'000'000);

struct SampledOrientations {
  std::vector<Dag> dags;
  bool underfilled = false;
};

// Unique orientations induced by uniformly random node permutations, at most
// 100 * count permutation draws. `exclude` orientations are never returned.
SampledOrientations sample_orientations(const Skeleton& s, std::size_t count, Rng& rng,
                                        const std::vector<Dag>& exclude = {});

// Random Function Graph Decomposition coloring. Nodes off every src -> y
// directed path get kUncolored, src gets kSourceColor, the rest 1, 2, ...
struct Coloring {
  static constexpr int kUncolored = -1;
  static constexpr int kSourceColor = 0;
  std::vector<int> color;
};

Coloring rf_graph_decomposition(const Dag& g, int src, int y);
// Same coloring computed under a caller-supplied topological order.
Coloring rf_graph_decomposition(const Dag& g, int src, int y, const std::vector<int>& order);

// Named graphs. `line`, `triangle`, `diamond` have 3-4 nodes; `hall` is the
// six-node graph with two paths of different structure from its source.
Dag line_graph(std::size_t n = 3);
Dag triangle_graph();
Dag diamond_graph();
Dag hall_graph();
Dag complete_graph(std::size_t n);
// Three four-node graphs whose skeletons coincide; an oracle orienting only
// unconfounded edges sees the same answer on the first two.
Dag counterexample_g1();
Dag counterexample_g2();
Dag counterexample_g3();

// Erdos-Renyi DAG: each pair in a random node order gets an edge with
// probability edge_prob, oriented along the order.
Dag random_dag(std::size_t n, double edge_prob, Rng& rng);

// Graph JSON: {"nodes": [...], "edges": [[from, to], ...]} with node names;
// skeleton JSON uses "links". Output is sorted and stable.
std::string dag_to_json(const Dag& g);
Dag dag_from_json(const std::string& text);
std::string skeleton_to_json(const Skeleton& s);
Skeleton skeleton_from_json(const std::string& text);

// Reorders a graph's nodes to match `names` (same set, different order).
Dag reindex(const Dag& g, const std::vector<std::string>& names);
Skeleton reindex(const Skeleton& s, const std::vector<std::string>& names);

}  // namespace entropic
