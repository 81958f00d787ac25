#include "entropic/citest.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "entropic/errors.hpp"

namespace entropic {

double chi_squared_sf(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  if (!(statistic > 0.0)) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

CiResult g_test_columns(std::span<const int> x, int card_x, std::span<const int> y, int card_y,
                        std::span<const int> stratum, std::size_t num_strata, std::span<const double> weights,
                        double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("significance level must be in (0, 1)");
  const std::size_t rows = x.size();
  const std::size_t cells = static_cast<std::size_t>(card_x) * card_y;
  std::vector<double> table(num_strata * cells, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double w = weights.empty() ? 1.0 : weights[r];
    table[stratum[r] * cells + static_cast<std::size_t>(x[r]) * card_y + y[r]] += w;
  }

  CiResult res;
  double g = 0.0;
  int dof = 0;
  std::vector<double> row_sum(card_x), col_sum(card_y);
  for (std::size_t s = 0; s < num_strata; ++s) {
    const double* t = table.data() + s * cells;
    std::fill(row_sum.begin(), row_sum.end(), 0.0);
    std::fill(col_sum.begin(), col_sum.end(), 0.0);
    double total = 0.0;
    for (int a = 0; a < card_x; ++a) {
      for (int b = 0; b < card_y; ++b) {
        row_sum[a] += t[a * card_y + b];
        col_sum[b] += t[a * card_y + b];
        total += t[a * card_y + b];
      }
    }
    const int rows_present = static_cast<int>(std::count_if(row_sum.begin(), row_sum.end(), [](double v) { return v > 0; }));
    const int cols_present = static_cast<int>(std::count_if(col_sum.begin(), col_sum.end(), [](double v) { return v > 0; }));
    if (rows_present < 2 || cols_present < 2) continue;
    dof += (rows_present - 1) * (cols_present - 1);
    for (int a = 0; a < card_x; ++a) {
      for (int b = 0; b < card_y; ++b) {
        const double o = t[a * card_y + b];
        if (o <= 0.0) continue;
        g += o * std::log(o * total / (row_sum[a] * col_sum[b]));
      }
    }
  }
  g = std::max(0.0, 2.0 * g);
  res.statistic = g;
  res.dof = dof;
  if (dof == 0) {
    res.degenerate = true;
    res.p_value = 1.0;
    res.independent = true;
    return res;
  }
  res.p_value = chi_squared_sf(g, dof);
  res.independent = res.p_value > alpha;
  return res;
}

CiResult g_test_ci(const Dataset& data, int i, int j, std::span<const int> cond, double alpha) {
  const int n = static_cast<int>(data.num_vars());
  if (i < 0 || j < 0 || i >= n || j >= n) throw InvalidParameter("variable index out of range");
  if (i == j) throw InvalidParameter("independence test needs two distinct variables");
  for (int c : cond) {
    if (c < 0 || c >= n) throw InvalidParameter("conditioning variable index out of range");
    if (c == i || c == j) throw InvalidParameter("tested variable appears in the conditioning set");
  }
  if (data.num_rows() == 0) throw InsufficientData("dataset has no rows");
  // The statistic is symmetric; fix the table orientation so the result is
  // bit-identical for (i, j) and (j, i).
  if (j < i) std::swap(i, j);
  const RowGroups groups = group_rows(data, cond);
  return g_test_columns(data.column(i), data.card(i), data.column(j), data.card(j), groups.group_of_row,
                        groups.num_groups(), data.weights(), alpha);
}

CiResult dsep_ci(const Dag& g, int i, int j, const std::vector<int>& cond) {
  CiResult res;
  res.independent = d_separated(g, i, j, cond);
  res.statistic = res.independent ? 0.0 : 1.0;
  res.p_value = res.independent ? 1.0 : 0.0;
  return res;
}

}  // namespace entropic
