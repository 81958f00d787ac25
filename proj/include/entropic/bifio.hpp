#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "entropic/graphs.hpp"
#include "entropic/probcore.hpp"
#include "entropic/rng.hpp"

namespace entropic {

// Discrete Bayesian network read from a .bif file. Parents keep their
// declared order; CPT rows are indexed by parent configuration with the
// first parent most significant.
struct BayesNet {
  struct Variable {
    std::string name;
    std::vector<std::string> states;
  };

  std::string name;
  std::vector<Variable> variables;
  std::vector<std::vector<int>> parents;
  std::vector<std::vector<Categorical>> cpts;
  // Non-fatal notes, e.g. rows renormalized within tolerance.
  std::vector<std::string> warnings;

  std::size_t num_vars() const { return variables.size(); }
  int card(int v) const { return static_cast<int>(variables[v].states.size()); }
  std::size_t config_index(int v, const std::vector<int>& values) const;
};

// CPT rows may deviate from 1 by this much; they are then renormalized.
inline constexpr double kBifRowTolerance = 1e-4;

BayesNet parse_bif(std::string_view text);
BayesNet read_bif(const std::string& path);

// Ancestral sampling; columns in declaration order, values are state indices.
Dataset bn_sample(const BayesNet& net, std::size_t n_samples, Rng& rng);

Dag bn_truth(const BayesNet& net);

// {"Var": ["state0", "state1", ...], ...} in declaration order.
std::string state_names_json(const BayesNet& net);

}  // namespace entropic
