#include "entropic/scm.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "entropic/errors.hpp"

namespace entropic {

Scm::Scm(Dag graph, std::vector<int> n_states, std::vector<Mechanism> mechanisms)
    : graph_(std::move(graph)), n_states_(std::move(n_states)), mechanisms_(std::move(mechanisms)) {
  const std::size_t n = graph_.num_nodes();
  if (n_states_.size() != n || mechanisms_.size() != n) {
    throw InvalidParameter("SCM needs one state count and one mechanism per node");
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (n_states_[v] < 1) throw InvalidParameter("state count must be >= 1");
    const auto& mech = mechanisms_[v];
    if (mech.parents != graph_.parents(static_cast<int>(v))) {
      throw InvalidParameter("mechanism parents of '" + graph_.names()[v] + "' differ from the graph");
    }
    if (mech.table.size() != num_configs(static_cast<int>(v)) * mech.exo.size()) {
      throw InvalidParameter("function table of '" + graph_.names()[v] + "' has the wrong size");
    }
    for (int x : mech.table) {
      if (x < 0 || x >= n_states_[v]) throw InvalidParameter("function table entry out of range");
    }
  }
}

std::size_t Scm::num_configs(int v) const {
  std::size_t c = 1;
  for (int p : mechanisms_[v].parents) c *= static_cast<std::size_t>(n_states_[p]);
  return c;
}

std::size_t Scm::config_index(int v, const std::vector<int>& values) const {
  std::size_t c = 0;
  for (int p : mechanisms_[v].parents) c = c * static_cast<std::size_t>(n_states_[p]) + values[p];
  return c;
}

namespace {

std::size_t config_count(const Dag& g, int v, int n) {
  std::size_t c = 1;
  for (std::size_t k = 0; k < g.parents(v).size(); ++k) {
    c *= static_cast<std::size_t>(n);
    if (c > 100'000'000) throw CapacityError("function table of '" + g.names()[v] + "' is too large");
  }
  return c;
}

}  // namespace

Scm random_scm(const Dag& g, int n, int m, const NoiseSpec& noise, bool high_entropy_sources, Rng& rng) {
  if (n < 1 || m < 1) throw InvalidParameter("state counts must be >= 1");
  std::vector<Mechanism> mechs(g.num_nodes());
  for (int v = 0; v < static_cast<int>(g.num_nodes()); ++v) {
    auto& mech = mechs[v];
    mech.parents = g.parents(v);
    if (noise.kind == NoiseSpec::Kind::kCyclicUniform) {
      if (noise.half_width < 0) throw InvalidParameter("cyclic half-width must be >= 0");
      mech.exo = Categorical::uniform(2 * static_cast<std::size_t>(noise.half_width) + 1);
    } else {
      const bool hes = high_entropy_sources && mech.parents.empty();
      const double target = hes ? kHighEntropySourceBits : noise.target_bits;
      mech.exo = entropy_targeted_dirichlet(static_cast<std::size_t>(m), target, noise.tol, rng);
    }
    const std::size_t cells = config_count(g, v, n) * mech.exo.size();
    mech.table.resize(cells);
    for (auto& x : mech.table) x = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  }
  return Scm(g, std::vector<int>(g.num_nodes(), n), std::move(mechs));
}

Scm anm_scm(const Dag& g, int n, int half_width, Rng& rng) {
  if (n < 1) throw InvalidParameter("state count must be >= 1");
  if (half_width < 0 || 2 * half_width + 1 > n) {
    throw InvalidParameter("cyclic noise window 2k+1 = " + std::to_string(2 * half_width + 1) +
                           " exceeds the state count " + std::to_string(n));
  }
  const int width = 2 * half_width + 1;
  std::vector<Mechanism> mechs(g.num_nodes());
  for (int v = 0; v < static_cast<int>(g.num_nodes()); ++v) {
    auto& mech = mechs[v];
    mech.parents = g.parents(v);
    mech.exo = Categorical::uniform(static_cast<std::size_t>(width));
    const std::size_t configs = config_count(g, v, n);
    mech.table.resize(configs * width);
    for (std::size_t c = 0; c < configs; ++c) {
      const int f = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      for (int e = 0; e < width; ++e) {
        mech.table[c * width + e] = ((f + e - half_width) % n + n) % n;
      }
    }
  }
  return Scm(g, std::vector<int>(g.num_nodes(), n), std::move(mechs));
}

Dataset sample(const Scm& scm, std::size_t n_samples, Rng& rng) {
  if (n_samples < 1) throw InvalidParameter("sample count must be >= 1");
  const std::size_t n = scm.num_nodes();
  const auto order = topological_order(scm.graph());
  std::vector<std::vector<double>> cdf(n);
  for (std::size_t v = 0; v < n; ++v) {
    double acc = 0.0;
    for (double p : scm.mechanism(static_cast<int>(v)).exo.probs()) cdf[v].push_back(acc += p);
  }
  std::vector<std::vector<int>> columns(n, std::vector<int>(n_samples));
  std::vector<int> values(n);
  for (std::size_t r = 0; r < n_samples; ++r) {
    for (int v : order) {
      const auto& c = cdf[v];
      const double u = rng.uniform() * c.back();
      auto it = std::upper_bound(c.begin(), c.end(), u);
      std::size_t e = std::min<std::size_t>(static_cast<std::size_t>(it - c.begin()), c.size() - 1);
      values[v] = scm.evaluate(v, scm.config_index(v, values), e);
      columns[v][r] = values[v];
    }
  }
  return Dataset(scm.graph().names(), scm.n_states(), std::move(columns));
}

Dataset JointDistribution::to_dataset() const {
  std::vector<std::vector<int>> columns(names.size());
  for (const auto& cfg : configs) {
    for (std::size_t v = 0; v < cfg.size(); ++v) columns[v].push_back(cfg[v]);
  }
  return Dataset(names, cards, std::move(columns), probs);
}

JointDistribution exact_joint(const Scm& scm) {
  const std::size_t n = scm.num_nodes();
  double space = 1.0;
  for (int c : scm.n_states()) space *= c;
  if (space > kMaxJointConfigurations) {
    throw CapacityError("joint state space of " + std::to_string(static_cast<long long>(space)) +
                        " configurations exceeds the exact-joint cap");
  }
  std::vector<std::uint64_t> stride(n, 1);
  for (std::size_t v = n; v-- > 1;) stride[v - 1] = stride[v] * static_cast<std::uint64_t>(scm.n_states(static_cast<int>(v)));

  std::unordered_map<std::uint64_t, double> mass{{0, 1.0}};
  std::vector<int> values(n, 0);
  for (int v : topological_order(scm.graph())) {
    const auto& mech = scm.mechanism(v);
    std::unordered_map<std::uint64_t, double> next;
    next.reserve(mass.size() * 2);
    for (const auto& [code, p] : mass) {
      for (int u : mech.parents) values[u] = static_cast<int>((code / stride[u]) % scm.n_states(u));
      const std::size_t cfg = scm.config_index(v, values);
      for (std::size_t e = 0; e < mech.exo.size(); ++e) {
        const double pe = mech.exo[e];
        if (pe <= 0.0) continue;
        next[code + stride[v] * static_cast<std::uint64_t>(scm.evaluate(v, cfg, e))] += p * pe;
      }
    }
    mass = std::move(next);
  }

  std::vector<std::pair<std::uint64_t, double>> sorted(mass.begin(), mass.end());
  std::sort(sorted.begin(), sorted.end());
  JointDistribution out;
  out.names = scm.graph().names();
  out.cards = scm.n_states();
  double total = 0.0;
  for (const auto& [code, p] : sorted) total += p;
  for (const auto& [code, p] : sorted) {
    std::vector<int> cfg(n);
    for (std::size_t v = 0; v < n; ++v) cfg[v] = static_cast<int>((code / stride[v]) % scm.n_states(static_cast<int>(v)));
    out.configs.push_back(std::move(cfg));
    out.probs.push_back(p / total);
  }
  return out;
}

bool support_check(const Categorical& p, int alpha_count, double beta) {
  int count = 0;
  for (double x : p.probs()) {
    if (x >= beta) ++count;
  }
  return count >= alpha_count;
}

std::string scm_to_json(const Scm& scm) {
  nlohmann::ordered_json j;
  j["nodes"] = scm.graph().names();
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (auto [a, b] : scm.graph().edges()) edges.push_back({scm.graph().names()[a], scm.graph().names()[b]});
  j["edges"] = edges;
  j["n_states"] = scm.n_states();
  nlohmann::ordered_json mechs = nlohmann::ordered_json::array();
  for (int v = 0; v < static_cast<int>(scm.num_nodes()); ++v) {
    const auto& m = scm.mechanism(v);
    nlohmann::ordered_json mj;
    mj["parents"] = m.parents;
    mj["exo"] = m.exo.probs();
    mj["table"] = m.table;
    mechs.push_back(mj);
  }
  j["mechanisms"] = mechs;
  return j.dump() + "\n";
}

Scm scm_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    Dag g = dag_from_json(text);
    auto n_states = j.at("n_states").get<std::vector<int>>();
    std::vector<Mechanism> mechs;
    for (const auto& mj : j.at("mechanisms")) {
      Mechanism m;
      m.parents = mj.at("parents").get<std::vector<int>>();
      m.exo = Categorical(mj.at("exo").get<std::vector<double>>());
      m.table = mj.at("table").get<std::vector<int>>();
      mechs.push_back(std::move(m));
    }
    return Scm(std::move(g), std::move(n_states), std::move(mechs));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("bad SCM JSON: ") + e.what());
  }
}

}  // namespace entropic
