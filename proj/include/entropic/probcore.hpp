#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "entropic/rng.hpp"

namespace entropic {

// A finite probability vector. Masses are non-negative and sum to one
// (within 1e-9); the constructor rejects anything else.
class Categorical {
 public:
  explicit Categorical(std::vector<double> probs);

  // Normalizes non-negative weights with a positive sum.
  static Categorical from_weights(std::vector<double> weights);
  static Categorical point_mass(std::size_t k, std::size_t state);
  static Categorical uniform(std::size_t k);

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t support_size() const;

 private:
  std::vector<double> probs_;
};

// Shannon entropy in bits of a probability vector; 0 log 0 = 0.
double entropy_bits(std::span<const double> p);
inline double entropy(const Categorical& p) { return entropy_bits(p.probs()); }

Categorical dirichlet_sample(std::size_t k, double alpha, Rng& rng);

struct TargetedDirichletOptions {
  double alpha_lo = 1e-4;
  double alpha_hi = 1e4;
  int bisection_steps = 60;
  int mc_draws = 200;
  int rejection_cap = 10000;
};

// Draws a Categorical whose entropy is within `tol` bits of `target_bits`:
// bisects the symmetric Dirichlet concentration on a Monte-Carlo estimate of
// mean entropy, then rejection-samples individual draws into the band.
Categorical entropy_targeted_dirichlet(std::size_t k, double target_bits, double tol, Rng& rng,
                                       const TargetedDirichletOptions& opts = {});

// Integer-coded observations, stored column-major. Optional per-row weights
// (empty means every row has weight 1); exact joints are carried as one row
// per configuration weighted by its probability.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> names, std::vector<int> cards,
          std::vector<std::vector<int>> columns, std::vector<double> weights = {});

  std::size_t num_vars() const { return names_.size(); }
  std::size_t num_rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<int>& cards() const { return cards_; }
  int card(std::size_t v) const { return cards_[v]; }
  const std::vector<int>& column(std::size_t v) const { return columns_[v]; }
  int at(std::size_t row, std::size_t v) const { return columns_[v][row]; }
  bool weighted() const { return !weights_.empty(); }
  double weight(std::size_t row) const { return weights_.empty() ? 1.0 : weights_[row]; }
  const std::vector<double>& weights() const { return weights_; }
  double total_weight() const;

  // Index of a column by name, or -1.
  int index_of(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::vector<int> cards_;
  std::vector<std::vector<int>> columns_;
  std::vector<double> weights_;
};

// Rows grouped by their configuration over a variable subset. Groups are
// numbered in lexicographic order of their configuration.
struct RowGroups {
  std::vector<int> group_of_row;
  std::vector<std::vector<int>> configs;
  std::size_t num_groups() const { return configs.size(); }
};

RowGroups group_rows(const Dataset& data, std::span<const int> vars);

struct ConditionalEntry {
  std::vector<int> config;  // values of `given`, in the order passed
  double weight;            // empirical probability of the configuration
  Categorical conditional;  // distribution of the target given the configuration
};

// Plug-in conditionals of `target` for every observed configuration of
// `given`. Unobserved configurations are omitted.
std::vector<ConditionalEntry> empirical_conditionals(const Dataset& data, int target,
                                                     std::span<const int> given,
                                                     double smoothing = 0.0);

// Plug-in marginal of one column.
Categorical empirical_marginal(const Dataset& data, int var);

// CSV: header row of names, then comma-separated non-negative integers.
// Cardinalities default to max observed + 1 per column.
Dataset read_dataset_csv(const std::string& path);
Dataset parse_dataset_csv(const std::string& text);
std::string dataset_to_csv(const Dataset& data);
void write_dataset_csv(const Dataset& data, const std::string& path);

// Sidecar schema JSON: {"columns": [...], "cards": [...]}.
std::string dataset_schema_json(const Dataset& data);
Dataset apply_schema(const Dataset& data, const std::string& schema_json);

}  // namespace entropic
