#pragma once

#include <span>
#include <vector>

#include "entropic/graphs.hpp"
#include "entropic/probcore.hpp"

namespace entropic {

struct CiResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool independent = true;
  // No configuration had two present rows and columns; nothing was tested.
  bool degenerate = false;
};

// Likelihood-ratio (G) test of i _||_ j | cond, stratified over the observed
// configurations of cond. Rows and columns with zero count are dropped per
// stratum. Row weights are treated as counts.
CiResult g_test_ci(const Dataset& data, int i, int j, std::span<const int> cond, double alpha = 0.05);

// Same test over raw integer columns; strata given as a group index per row.
CiResult g_test_columns(std::span<const int> x, int card_x, std::span<const int> y, int card_y,
                        std::span<const int> stratum, std::size_t num_strata, std::span<const double> weights,
                        double alpha);

// Population test from the graph: independent iff d-separated.
CiResult dsep_ci(const Dag& g, int i, int j, const std::vector<int>& cond);

// Upper tail of the chi-squared distribution.
double chi_squared_sf(double statistic, int dof);

}  // namespace entropic
