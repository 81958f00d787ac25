#pragma once

#include <span>
#include <vector>

#include "entropic/probcore.hpp"

namespace entropic {

// A joint assignment over m marginals, stored sparsely.
struct Coupling {
  struct Cell {
    std::vector<int> index;  // one state per marginal
    double mass;
  };
  std::vector<Cell> cells;
  double entropy_bits = 0.0;
  std::size_t marginal_count = 0;

  // Projection of the cell masses onto coordinate i.
  std::vector<double> marginal(std::size_t i, std::size_t k) const;
};

// Greedy minimum-entropy coupling: repeatedly pair the largest remaining
// mass of every marginal, emitting the smallest of those maxima as one cell.
Coupling greedy_coupling(std::span<const Categorical> marginals);

// Same procedure without materializing the cells.
double greedy_coupling_entropy(std::span<const Categorical> marginals);

// Exact minimum coupling entropy of two small marginals (support <= 3 each),
// from the vertices of the transportation polytope plus a grid scan of the
// free coordinates. Test oracle only.
double bruteforce_coupling(const Categorical& p, const Categorical& q, double grid);

// MEC(target | given): greedy coupling entropy of the empirical conditionals.
// Configuration weights do not enter the objective.
double mec(const Dataset& data, int target, std::span<const int> given, double smoothing = 0.0);

}  // namespace entropic
