#pragma once

#include <string>
#include <vector>

#include "entropic/graphs.hpp"
#include "entropic/probcore.hpp"
#include "entropic/rng.hpp"

namespace entropic {

// Structural equation of one node: value = table[config * exo.size() + e],
// where config is the mixed-radix index of the parent values (first parent
// most significant) and e is drawn from exo.
struct Mechanism {
  std::vector<int> parents;
  Categorical exo{std::vector<double>{1.0}};
  std::vector<int> table;
};

class Scm {
 public:
  Scm(Dag graph, std::vector<int> n_states, std::vector<Mechanism> mechanisms);

  const Dag& graph() const { return graph_; }
  std::size_t num_nodes() const { return graph_.num_nodes(); }
  int n_states(int v) const { return n_states_[v]; }
  const std::vector<int>& n_states() const { return n_states_; }
  const Mechanism& mechanism(int v) const { return mechanisms_[v]; }

  // Parent configuration index of node v for a full assignment.
  std::size_t config_index(int v, const std::vector<int>& values) const;
  std::size_t num_configs(int v) const;
  int evaluate(int v, std::size_t config, std::size_t exo_state) const {
    return mechanisms_[v].table[config * mechanisms_[v].exo.size() + exo_state];
  }

 private:
  Dag graph_;
  std::vector<int> n_states_;
  std::vector<Mechanism> mechanisms_;
};

struct NoiseSpec {
  enum class Kind { kDirichletTargeted, kCyclicUniform };
  Kind kind = Kind::kDirichletTargeted;
  double target_bits = 1.0;
  double tol = 0.05;
  int half_width = 1;

  static NoiseSpec targeted(double bits, double tol = 0.05) { return {Kind::kDirichletTargeted, bits, tol, 0}; }
  static NoiseSpec cyclic(int k) { return {Kind::kCyclicUniform, 0.0, 0.0, k}; }
};

// Exogenous entropy assigned to in-degree-0 nodes in the high-entropy-source
// setting.
inline constexpr double kHighEntropySourceBits = 3.3;

// Uniformly random function tables over n states with m exogenous states;
// exogenous distributions drawn per `noise` (targeted Dirichlet, or uniform
// over 2k+1 states for the cyclic kind).
Scm random_scm(const Dag& g, int n, int m, const NoiseSpec& noise, bool high_entropy_sources, Rng& rng);

// Cyclic additive-noise model: value = (f(parents) + offset) mod n with the
// offset uniform on {-k, ..., k}.
Scm anm_scm(const Dag& g, int n, int half_width, Rng& rng);

Dataset sample(const Scm& scm, std::size_t n_samples, Rng& rng);

struct JointDistribution {
  std::vector<std::string> names;
  std::vector<int> cards;
  std::vector<std::vector<int>> configs;  // sorted, only positive mass
  std::vector<double> probs;

  // One row per configuration, weighted by its probability.
  Dataset to_dataset() const;
};

inline constexpr double kMaxJointConfigurations = 1e7;

JointDistribution exact_joint(const Scm& scm);

// True iff at least `alpha_count` states carry mass >= beta.
bool support_check(const Categorical& p, int alpha_count, double beta);

std::string scm_to_json(const Scm& scm);
Scm scm_from_json(const std::string& text);

}  // namespace entropic
