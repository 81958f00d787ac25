#include "entropic/graphs.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <queue>

#include <nlohmann/json.hpp>

#include "entropic/errors.hpp"

namespace entropic {

namespace {

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("X" + std::to_string(i));
  return names;
}

bool reaches(const std::vector<std::vector<int>>& children, int from, int to) {
  std::vector<bool> seen(children.size(), false);
  std::vector<int> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v == to) return true;
    for (int c : children[v]) {
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
    }
  }
  return false;
}

void check_unique_names(const std::vector<std::string>& names) {
  std::vector<std::string> sorted = names;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidParameter("duplicate node name");
  }
}

}  // namespace

Dag::Dag(std::vector<std::string> names, std::vector<Edge> edges)
    : names_(std::move(names)), edges_(std::move(edges)) {
  check_unique_names(names_);
  const int n = static_cast<int>(names_.size());
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  parents_.assign(n, {});
  children_.assign(n, {});
  for (auto [u, v] : edges_) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw InvalidParameter("edge endpoint out of range");
    if (u == v) throw InvalidParameter("self-loop on '" + names_[u] + "'");
    parents_[v].push_back(u);
    children_[u].push_back(v);
  }
  for (auto& p : parents_) std::sort(p.begin(), p.end());
  for (auto& c : children_) std::sort(c.begin(), c.end());
  for (auto [u, v] : edges_) {
    if (reaches(children_, v, u)) throw InvalidParameter("graph has a directed cycle through '" + names_[u] + "'");
  }
}

Dag::Dag(std::size_t n, std::vector<Edge> edges) : Dag(default_names(n), std::move(edges)) {}

bool Dag::has_edge(int from, int to) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to});
}

std::vector<bool> Dag::descendants(int v) const {
  std::vector<bool> seen(num_nodes(), false);
  std::vector<int> stack{v};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int c : children_[u]) {
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
    }
  }
  return seen;
}

std::vector<bool> Dag::ancestors(int v) const {
  std::vector<bool> seen(num_nodes(), false);
  std::vector<int> stack{v};
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int p : parents_[u]) {
      if (!seen[p]) {
        seen[p] = true;
        stack.push_back(p);
      }
    }
  }
  return seen;
}

std::vector<int> Dag::sources() const {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(num_nodes()); ++v) {
    if (parents_[v].empty()) out.push_back(v);
  }
  return out;
}

Skeleton::Skeleton(std::vector<std::string> names, std::vector<Edge> links)
    : names_(std::move(names)), links_(std::move(links)) {
  check_unique_names(names_);
  const int n = static_cast<int>(names_.size());
  for (auto& [a, b] : links_) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw InvalidParameter("link endpoint out of range");
    if (a == b) throw InvalidParameter("self-loop on '" + names_[a] + "'");
    if (a > b) std::swap(a, b);
  }
  std::sort(links_.begin(), links_.end());
  links_.erase(std::unique(links_.begin(), links_.end()), links_.end());
}

Skeleton::Skeleton(const Dag& g) {
  std::vector<Edge> links;
  for (auto [u, v] : g.edges()) links.emplace_back(std::min(u, v), std::max(u, v));
  *this = Skeleton(g.names(), std::move(links));
}

std::vector<int> Skeleton::neighbors(int v) const {
  std::vector<int> out;
  for (auto [a, b] : links_) {
    if (a == v) out.push_back(b);
    if (b == v) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Skeleton::has_link(int a, int b) const {
  return std::binary_search(links_.begin(), links_.end(), Edge{std::min(a, b), std::max(a, b)});
}

std::vector<int> topological_order(const Dag& g) {
  const int n = static_cast<int>(g.num_nodes());
  std::vector<int> indeg(n);
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v) {
    indeg[v] = static_cast<int>(g.parents(v).size());
    if (indeg[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : g.children(v)) {
      if (--indeg[c] == 0) ready.push(c);
    }
  }
  return order;
}

bool d_separated(const Dag& g, int i, int j, const std::vector<int>& cond) {
  const int n = static_cast<int>(g.num_nodes());
  if (i < 0 || j < 0 || i >= n || j >= n) throw InvalidParameter("node index out of range");
  if (i == j) throw InvalidParameter("d-separation needs two distinct nodes");
  std::vector<bool> in_cond(n, false);
  for (int c : cond) {
    if (c == i || c == j) throw InvalidParameter("query node in the conditioning set");
    in_cond.at(c) = true;
  }
  // Conditioning nodes and their ancestors: colliders there are open.
  std::vector<bool> anc_cond(n, false);
  for (int c : cond) {
    anc_cond[c] = true;
    auto a = g.ancestors(c);
    for (int v = 0; v < n; ++v) {
      if (a[v]) anc_cond[v] = true;
    }
  }

  // Reachability over (node, arrived-from-child?) states.
  std::vector<std::array<bool, 2>> seen(n, {false, false});
  std::vector<std::pair<int, bool>> stack{{i, true}};
  while (!stack.empty()) {
    auto [v, up] = stack.back();
    stack.pop_back();
    if (seen[v][up]) continue;
    seen[v][up] = true;
    if (v == j) return false;
    if (up) {
      if (in_cond[v]) continue;
      for (int p : g.parents(v)) stack.emplace_back(p, true);
      for (int c : g.children(v)) stack.emplace_back(c, false);
    } else {
      if (!in_cond[v]) {
        for (int c : g.children(v)) stack.emplace_back(c, false);
      }
      if (anc_cond[v]) {
        for (int p : g.parents(v)) stack.emplace_back(p, true);
      }
    }
  }
  return true;
}

int shd(const Dag& a, const Dag& b) {
  if (a.names() != b.names()) throw InvalidParameter("SHD needs graphs over the same nodes");
  int d = 0;
  const int n = static_cast<int>(a.num_nodes());
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      const bool in_a = a.adjacent(u, v);
      const bool in_b = b.adjacent(u, v);
      if (in_a != in_b) {
        ++d;
      } else if (in_a && a.has_edge(u, v) != b.has_edge(u, v)) {
        ++d;
      }
    }
  }
  return d;
}

std::vector<bool> orientation_bits(const Dag& g, const Skeleton& s) {
  if (!(Skeleton(g) == s)) throw InvalidParameter("graph is not an orientation of the skeleton");
  std::vector<bool> bits;
  for (auto [a, b] : s.links()) bits.push_back(g.has_edge(b, a));
  return bits;
}

Dag orient(const Skeleton& s, const std::vector<bool>& bits) {
  if (bits.size() != s.links().size()) throw InvalidParameter("one orientation bit per link expected");
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    auto [a, b] = s.links()[k];
    edges.push_back(bits[k] ? Edge{b, a} : Edge{a, b});
  }
  return Dag(s.names(), std::move(edges));
}

std::vector<Dag> enumerate_orientations(const Skeleton& s, std::size_t cap) {
  if (cap < 1) throw InvalidParameter("orientation cap must be >= 1");
  const auto& links = s.links();
  std::vector<std::vector<int>> children(s.num_nodes());
  std::vector<bool> bits(links.size(), false);
  std::vector<Dag> out;

  std::function<void(std::size_t)> assign = [&](std::size_t k) {
    if (k == links.size()) {
      if (out.size() >= cap) {
        throw TooManyOrientations("skeleton has more than " + std::to_string(cap) +
                                  " acyclic orientations; sample orientations instead");
      }
      out.push_back(orient(s, bits));
      return;
    }
    auto [a, b] = links[k];
    for (int flip = 0; flip < 2; ++flip) {
      const int from = flip ? b : a;
      const int to = flip ? a : b;
      if (reaches(children, to, from)) continue;
      children[from].push_back(to);
      bits[k] = flip;
      assign(k + 1);
      children[from].pop_back();
    }
  };
  assign(0);
  return out;
}

SampledOrientations sample_orientations(const Skeleton& s, std::size_t count, Rng& rng,
                                        const std::vector<Dag>& exclude) {
  if (count < 1) throw InvalidParameter("sample count must be >= 1");
  std::set<std::vector<bool>> seen;
  for (const auto& g : exclude) seen.insert(orientation_bits(g, s));
  SampledOrientations out;
  std::vector<int> perm(s.num_nodes());
  std::vector<int> pos(s.num_nodes());
  const std::size_t max_draws = 100 * count;
  for (std::size_t draw = 0; draw < max_draws && out.dags.size() < count; ++draw) {
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    rng.shuffle(perm);
    for (std::size_t i = 0; i < perm.size(); ++i) pos[perm[i]] = static_cast<int>(i);
    std::vector<bool> bits;
    for (auto [a, b] : s.links()) bits.push_back(pos[b] < pos[a]);
    if (seen.insert(bits).second) out.dags.push_back(orient(s, bits));
  }
  out.underfilled = out.dags.size() < count;
  return out;
}

Coloring rf_graph_decomposition(const Dag& g, int src, int y) {
  return rf_graph_decomposition(g, src, y, topological_order(g));
}

Coloring rf_graph_decomposition(const Dag& g, int src, int y, const std::vector<int>& order) {
  const int n = static_cast<int>(g.num_nodes());
  if (src < 0 || y < 0 || src >= n || y >= n) throw InvalidParameter("node index out of range");
  if (!g.parents(src).empty()) throw InvalidParameter("'" + g.names()[src] + "' is not a source");
  auto below = g.descendants(src);
  if (!below[y]) throw InvalidParameter("no directed path from '" + g.names()[src] + "' to '" + g.names()[y] + "'");
  auto above = g.ancestors(y);
  std::vector<bool> on_path(n, false);
  for (int v = 0; v < n; ++v) on_path[v] = below[v] && (above[v] || v == y);

  Coloring out;
  out.color.assign(n, Coloring::kUncolored);
  out.color[src] = Coloring::kSourceColor;
  int next = 1;
  for (int v : order) {
    if (!on_path[v]) continue;
    bool fresh = false;
    int inherited = Coloring::kUncolored;
    for (int p : g.parents(v)) {
      if (p == src) {
        fresh = true;
      } else if (on_path[p]) {
        if (inherited == Coloring::kUncolored) {
          inherited = out.color[p];
        } else if (inherited != out.color[p]) {
          fresh = true;
        }
      }
    }
    out.color[v] = fresh || inherited == Coloring::kUncolored ? next++ : inherited;
  }
  return out;
}

Dag line_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(static_cast<int>(i), static_cast<int>(i + 1));
  return Dag(n, std::move(edges));
}

Dag triangle_graph() { return Dag({"X", "Y", "Z"}, {{0, 1}, {1, 2}, {0, 2}}); }

Dag diamond_graph() { return Dag({"Xsrc", "X2", "X3", "Y"}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}); }

Dag hall_graph() {
  return Dag({"Xsrc", "X2", "X3", "X4", "X5", "Y"}, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 3}, {3, 5}, {4, 5}});
}

Dag complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  return Dag(n, std::move(edges));
}

namespace {
const std::vector<std::string> kFourNames{"X1", "X2", "X3", "X4"};
}

Dag counterexample_g1() { return Dag(kFourNames, {{0, 1}, {0, 2}, {1, 3}, {1, 2}, {2, 3}}); }
Dag counterexample_g2() { return Dag(kFourNames, {{1, 0}, {2, 0}, {3, 1}, {1, 2}, {3, 2}}); }
Dag counterexample_g3() { return Dag(kFourNames, {{0, 1}, {0, 2}, {3, 1}, {1, 2}, {3, 2}}); }

Dag random_dag(std::size_t n, double edge_prob, Rng& rng) {
  if (edge_prob < 0.0 || edge_prob > 1.0) throw InvalidParameter("edge probability must be in [0, 1]");
  std::vector<int> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
  rng.shuffle(perm);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (rng.uniform() < edge_prob) edges.emplace_back(perm[a], perm[b]);
    }
  }
  return Dag(n, std::move(edges));
}

namespace {

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("bad graph JSON: ") + e.what());
  }
}

std::vector<Edge> read_pairs(const nlohmann::json& arr, const std::vector<std::string>& names) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
  auto endpoint = [&](const nlohmann::json& x) -> int {
    if (x.is_number_integer()) return x.get<int>();
    auto it = index.find(x.get<std::string>());
    if (it == index.end()) throw InvalidParameter("unknown node '" + x.get<std::string>() + "'");
    return it->second;
  };
  std::vector<Edge> out;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2) throw InvalidParameter("graph edges must be pairs");
    out.emplace_back(endpoint(e[0]), endpoint(e[1]));
  }
  return out;
}

nlohmann::json write_pairs(const std::vector<Edge>& pairs, const std::vector<std::string>& names) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto [a, b] : pairs) arr.push_back({names[a], names[b]});
  return arr;
}

}  // namespace

std::string dag_to_json(const Dag& g) {
  nlohmann::ordered_json j;
  j["nodes"] = g.names();
  j["edges"] = write_pairs(g.edges(), g.names());
  return j.dump() + "\n";
}

Dag dag_from_json(const std::string& text) {
  auto j = parse_json(text);
  try {
    auto names = j.at("nodes").get<std::vector<std::string>>();
    return Dag(names, read_pairs(j.at("edges"), names));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("bad graph JSON: ") + e.what());
  }
}

std::string skeleton_to_json(const Skeleton& s) {
  nlohmann::ordered_json j;
  j["nodes"] = s.names();
  j["links"] = write_pairs(s.links(), s.names());
  return j.dump() + "\n";
}

Skeleton skeleton_from_json(const std::string& text) {
  auto j = parse_json(text);
  try {
    auto names = j.at("nodes").get<std::vector<std::string>>();
    // A Dag file is accepted as its own skeleton.
    const auto& pairs = j.contains("links") ? j.at("links") : j.at("edges");
    return Skeleton(names, read_pairs(pairs, names));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("bad skeleton JSON: ") + e.what());
  }
}

namespace {

std::vector<int> name_map(const std::vector<std::string>& from, const std::vector<std::string>& to) {
  if (from.size() != to.size()) throw InvalidParameter("node sets differ in size");
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < to.size(); ++i) index[to[i]] = static_cast<int>(i);
  std::vector<int> out;
  for (const auto& n : from) {
    auto it = index.find(n);
    if (it == index.end()) throw InvalidParameter("node '" + n + "' missing from the target node set");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace

Dag reindex(const Dag& g, const std::vector<std::string>& names) {
  auto m = name_map(g.names(), names);
  std::vector<Edge> edges;
  for (auto [a, b] : g.edges()) edges.emplace_back(m[a], m[b]);
  return Dag(names, std::move(edges));
}

Skeleton reindex(const Skeleton& s, const std::vector<std::string>& names) {
  auto m = name_map(s.names(), names);
  std::vector<Edge> links;
  for (auto [a, b] : s.links()) links.emplace_back(m[a], m[b]);
  return Skeleton(names, std::move(links));
}

}  // namespace entropic
