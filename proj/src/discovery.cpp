#include "entropic/discovery.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "entropic/coupling.hpp"
#include "entropic/errors.hpp"

namespace entropic {

std::string to_string(Measure m) {
  switch (m) {
    case Measure::kExogenous:
      return "exogenous";
    case Measure::kMarginal:
      return "marginal";
    case Measure::kTotal:
      return "total";
  }
  return "total";
}

Measure parse_measure(const std::string& s) {
  if (s == "exogenous") return Measure::kExogenous;
  if (s == "marginal") return Measure::kMarginal;
  if (s == "total") return Measure::kTotal;
  throw InvalidParameter("unknown measure '" + s + "' (expected exogenous, marginal or total)");
}

namespace {

std::vector<int> with(std::span<const int> cond, int extra) {
  std::vector<int> out(cond.begin(), cond.end());
  out.push_back(extra);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

OracleVerdict mec_oracle(const Dataset& data, int i, int j, std::span<const int> cond, Measure measure,
                         double smoothing) {
  if (i == j) throw InvalidParameter("oracle needs two distinct variables");
  for (int c : cond) {
    if (c == i || c == j) throw InvalidParameter("oriented variable appears in the conditioning set");
  }
  OracleVerdict v{i, j, 0.0, 0.0, measure};
  const auto given_i = with(cond, i);
  const auto given_j = with(cond, j);
  switch (measure) {
    case Measure::kExogenous:
      v.forward_score = mec(data, j, given_i, smoothing);
      v.reverse_score = mec(data, i, given_j, smoothing);
      break;
    case Measure::kTotal:
      v.forward_score = mec(data, i, cond, smoothing) + mec(data, j, given_i, smoothing);
      v.reverse_score = mec(data, j, cond, smoothing) + mec(data, i, given_j, smoothing);
      break;
    case Measure::kMarginal:
      v.forward_score = mec(data, i, cond, smoothing);
      v.reverse_score = mec(data, j, cond, smoothing);
      break;
  }
  const bool tie = std::abs(v.forward_score - v.reverse_score) <= kScoreTolerance;
  const bool forward = tie ? i < j : v.forward_score < v.reverse_score;
  if (!forward) std::swap(v.from, v.to);
  assert((v.from == i) == forward);
  return v;
}

bool MecOracle::forward(int i, int j, const std::vector<int>& cond) {
  return mec_oracle(data_, i, j, cond, measure_, smoothing_).from == i;
}

GroundTruthOracle::GroundTruthOracle(const Dag& truth) {
  for (int v = 0; v < static_cast<int>(truth.num_nodes()); ++v) reach_.push_back(truth.descendants(v));
}

bool GroundTruthOracle::forward(int i, int j, const std::vector<int>&) {
  if (reach_[i][j]) return true;
  if (reach_[j][i]) return false;
  return i < j;
}

void DiscoveryConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must be in (0, 1)");
  if (enumeration_cap < 1) throw InvalidParameter("enumeration cap must be >= 1");
  if (percentile_samples < 1) throw InvalidParameter("percentile sample count must be >= 1");
  if (smoothing < 0.0) throw InvalidParameter("smoothing must be >= 0");
}

namespace {

// Phase 1: the source order.
PeelResult peel_order(std::size_t num_vars, CiBackend& ci, DirectionOracle& oracle) {
  const int n = static_cast<int>(num_vars);
  if (n < 1) throw InvalidParameter("peeling needs at least one variable");
  PeelResult res;
  std::vector<int> remaining(n);
  for (int v = 0; v < n; ++v) remaining[v] = v;
  std::set<Edge> independent_pairs;

  while (!remaining.empty()) {
    std::vector<bool> non_source(n, false);
    std::vector<int> cond;
    {
      std::vector<bool> left(n, false);
      for (int v : remaining) left[v] = true;
      for (int v = 0; v < n; ++v) {
        if (!left[v]) cond.push_back(v);
      }
    }
    for (std::size_t a = 0; a < remaining.size(); ++a) {
      for (std::size_t b = a + 1; b < remaining.size(); ++b) {
        const int i = remaining[a];
        const int j = remaining[b];
        if (non_source[i] || non_source[j] || independent_pairs.count({i, j})) continue;
        ++res.ci_tests;
        if (ci.test(i, j, cond).independent) {
          independent_pairs.insert({i, j});
          continue;
        }
        ++res.oracle_calls;
        if (oracle.forward(i, j, cond)) {
          non_source[j] = true;
        } else {
          non_source[i] = true;
        }
      }
    }
    std::vector<int> sources;
    for (int v : remaining) {
      if (!non_source[v]) sources.push_back(v);
    }
    if (sources.empty()) {
      // Each comparison eliminates one of two live candidates, so a live
      // candidate always survives; kept for oracles that break that rule.
      sources.push_back(remaining.front());
      ++res.fallbacks;
    }
    for (int s : sources) {
      res.order.push_back(s);
      remaining.erase(std::find(remaining.begin(), remaining.end(), s));
    }
  }
  return res;
}

}  // namespace

PeelResult peel(const std::vector<std::string>& names, CiBackend& ci, DirectionOracle& oracle) {
  PeelResult res = peel_order(names.size(), ci, oracle);
  const int n = static_cast<int>(names.size());
  std::vector<Edge> edges;
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      std::vector<int> cond;
      for (int k = 0; k < j; ++k) {
        if (k != i) cond.push_back(res.order[k]);
      }
      std::sort(cond.begin(), cond.end());
      ++res.ci_tests;
      if (!ci.test(res.order[i], res.order[j], cond).independent) edges.emplace_back(res.order[i], res.order[j]);
    }
  }
  res.dag = Dag(names, std::move(edges));
  return res;
}

PeelResult peel(const Dataset& data, const DiscoveryConfig& config, const Dag* truth) {
  config.validate();
  MecOracle oracle(data, config.measure, config.smoothing);
  if (config.ci == DiscoveryConfig::Ci::kDSeparation) {
    if (truth == nullptr) throw InvalidParameter("the d-separation CI backend needs the true graph");
    const Dag aligned = reindex(*truth, data.names());
    DsepBackend ci(aligned);
    return peel(data.names(), ci, oracle);
  }
  GTestBackend ci(data, config.alpha);
  return peel(data.names(), ci, oracle);
}

Dag orient_along(const Skeleton& s, const std::vector<int>& order) {
  std::vector<int> rank(s.num_nodes(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) rank[order[k]] = static_cast<int>(k);
  std::vector<Edge> edges;
  for (auto [a, b] : s.links()) {
    if (rank[a] < 0 || rank[b] < 0) throw InvalidParameter("order does not cover every node");
    edges.push_back(rank[a] < rank[b] ? Edge{a, b} : Edge{b, a});
  }
  return Dag(s.names(), std::move(edges));
}

PeelResult peel(const Dataset& data, const Skeleton& skeleton, const DiscoveryConfig& config, const Dag* truth) {
  config.validate();
  const Skeleton s = skeleton.names() == data.names() ? skeleton : reindex(skeleton, data.names());
  MecOracle oracle(data, config.measure, config.smoothing);
  PeelResult res;
  if (config.ci == DiscoveryConfig::Ci::kDSeparation) {
    if (truth == nullptr) throw InvalidParameter("the d-separation CI backend needs the true graph");
    const Dag aligned = reindex(*truth, data.names());
    DsepBackend ci(aligned);
    res = peel_order(data.num_vars(), ci, oracle);
  } else {
    GTestBackend ci(data, config.alpha);
    res = peel_order(data.num_vars(), ci, oracle);
  }
  res.dag = orient_along(s, res.order);
  return res;
}

double FamilyScorer::family(int node, const std::vector<int>& parents) {
  auto key = std::make_pair(node, parents);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const double h = mec(data_, node, parents, smoothing_);
  cache_.emplace(std::move(key), h);
  return h;
}

double FamilyScorer::graph(const Dag& g) {
  double total = 0.0;
  for (int v = 0; v < static_cast<int>(g.num_nodes()); ++v) total += family(v, g.parents(v));
  return total;
}

namespace {

Skeleton aligned_skeleton(const Dataset& data, const Skeleton& skeleton) {
  if (skeleton.names() == data.names()) return skeleton;
  return reindex(skeleton, data.names());
}

}  // namespace

EnumerationResult enumerate_discover(const Dataset& data, const Skeleton& skeleton, const DiscoveryConfig& config) {
  config.validate();
  const Skeleton s = aligned_skeleton(data, skeleton);
  std::vector<Dag> candidates;
  try {
    candidates = enumerate_orientations(s, config.enumeration_cap);
  } catch (const TooManyOrientations& e) {
    throw TooManyOrientations(std::string(e.what()) + " (use the percentile path with sampled orientations)");
  }
  FamilyScorer scorer(data, config.smoothing);
  EnumerationResult res{candidates.front(), std::numeric_limits<double>::infinity(), {}};
  for (const auto& g : candidates) {
    const double score = scorer.graph(g);
    res.scores.push_back({orientation_bits(g, s), score, false});
    // Candidates arrive in lexicographic order, so only a clear improvement
    // replaces the incumbent and ties keep the smallest orientation vector.
    if (score < res.score - kScoreTolerance) {
      res.score = score;
      res.best = g;
    }
  }
  return res;
}

double percentile_from_counts(std::size_t strictly_better, std::size_t total) {
  if (total == 0 || strictly_better >= total) throw InvalidParameter("percentile needs better < total");
  return 1.0 - static_cast<double>(strictly_better) / static_cast<double>(total);
}

PercentileResult percentile(const Dataset& data, const Dag& truth, const Skeleton& skeleton,
                            const DiscoveryConfig& config, Rng& rng) {
  config.validate();
  const Skeleton s = aligned_skeleton(data, skeleton);
  const Dag t = truth.names() == data.names() ? truth : reindex(truth, data.names());
  const auto truth_bits = orientation_bits(t, s);

  PercentileResult res{};
  std::vector<Dag> candidates;
  try {
    candidates = enumerate_orientations(s, config.enumeration_cap);
  } catch (const TooManyOrientations&) {
    auto sampled = sample_orientations(s, config.percentile_samples, rng, {t});
    candidates = std::move(sampled.dags);
    candidates.insert(candidates.begin(), t);
    res.sampled = true;
    res.underfilled = sampled.underfilled;
  }

  FamilyScorer scorer(data, config.smoothing);
  res.truth_score = scorer.graph(t);
  for (const auto& g : candidates) {
    auto bits = orientation_bits(g, s);
    const bool is_truth = bits == truth_bits;
    const double score = is_truth ? res.truth_score : scorer.graph(g);
    if (!is_truth && score < res.truth_score - kScoreTolerance) ++res.strictly_better;
    res.scores.push_back({std::move(bits), score, is_truth});
  }
  res.candidates = candidates.size();
  res.percentile = percentile_from_counts(res.strictly_better, res.candidates);
  return res;
}

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Discrete regression refinement. Starting from the conditional modes, each
// configuration's fitted value is moved to the shift that makes the residual
// least dependent on the configuration. With fixed row totals the G statistic
// of residual vs configuration only varies through the residual marginal, so
// each step maximizes sum(col * log col), i.e. minimizes residual entropy.
void refine_fit(const std::vector<double>& counts, int card, std::vector<int>& fit) {
  const std::size_t groups = fit.size();
  std::vector<double> col(card, 0.0);
  for (std::size_t g = 0; g < groups; ++g) {
    for (int x = 0; x < card; ++x) col[((x - fit[g]) % card + card) % card] += counts[g * card + x];
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool changed = false;
    for (std::size_t g = 0; g < groups; ++g) {
      const double* row = &counts[g * card];
      for (int x = 0; x < card; ++x) col[((x - fit[g]) % card + card) % card] -= row[x];
      int best = fit[g];
      double best_val = -std::numeric_limits<double>::infinity();
      // Current fit first so that only a strict improvement moves it.
      for (int k = 0; k < card; ++k) {
        const int f = (fit[g] + k) % card;
        double val = 0.0;
        for (int r = 0; r < card; ++r) val += xlogx(col[r] + row[(r + f) % card]);
        if (val > best_val + 1e-9) {
          best_val = val;
          best = f;
        }
      }
      changed |= best != fit[g];
      fit[g] = best;
      for (int x = 0; x < card; ++x) col[((x - fit[g]) % card + card) % card] += row[x];
    }
    if (!changed) break;
  }
}

}  // namespace

AnmResult anm_baseline(const Dataset& data, const Skeleton& skeleton, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must be in (0, 1)");
  const Skeleton s = aligned_skeleton(data, skeleton);
  const int n = static_cast<int>(data.num_vars());
  if (n < 1) throw InvalidParameter("ANM baseline needs at least one variable");
  std::vector<bool> alive(n, true);
  std::vector<Edge> edges;
  AnmResult res;
  const std::size_t rows = data.num_rows();
  const std::vector<int> no_strata(rows, 0);

  for (int round = 0; round < n; ++round) {
    int best = -1;
    double best_p = -1.0;
    double best_stat = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n; ++c) {
      if (!alive[c]) continue;
      std::vector<int> nbrs;
      for (int v : s.neighbors(c)) {
        if (alive[v]) nbrs.push_back(v);
      }
      double min_p = std::numeric_limits<double>::infinity();
      double max_stat = 0.0;
      if (!nbrs.empty()) {
        // Regress c on its live neighbors: conditional mode per configuration.
        const RowGroups groups = group_rows(data, nbrs);
        const int card = data.card(c);
        std::vector<double> counts(groups.num_groups() * card, 0.0);
        const auto& col = data.column(c);
        for (std::size_t r = 0; r < rows; ++r) counts[groups.group_of_row[r] * card + col[r]] += data.weight(r);
        std::vector<int> fit(groups.num_groups(), 0);
        for (std::size_t g = 0; g < groups.num_groups(); ++g) {
          const auto first = counts.begin() + static_cast<std::ptrdiff_t>(g * card);
          fit[g] = static_cast<int>(std::max_element(first, first + card) - first);
        }
        refine_fit(counts, card, fit);
        std::vector<int> residual(rows);
        for (std::size_t r = 0; r < rows; ++r) residual[r] = ((col[r] - fit[groups.group_of_row[r]]) % card + card) % card;
        for (int v : nbrs) {
          auto t = g_test_columns(residual, card, data.column(v), data.card(v), no_strata, 1, data.weights(), alpha);
          min_p = std::min(min_p, t.p_value);
          max_stat = std::max(max_stat, t.statistic);
        }
      }
      // p-values underflow to 0 on large samples; the statistic then decides.
      if (min_p > best_p || (min_p == best_p && max_stat < best_stat)) {
        best_p = min_p;
        best_stat = max_stat;
        best = c;
      }
    }
    if (best_p <= alpha) ++res.all_dependent_rounds;
    for (int v : s.neighbors(best)) {
      if (alive[v]) edges.emplace_back(v, best);
    }
    alive[best] = false;
  }
  res.dag = Dag(data.names(), std::move(edges));
  return res;
}

std::string scores_to_csv(const std::vector<ScoredOrientation>& scores) {
  std::ostringstream out;
  out << "orientation,score,is_truth\n";
  out << std::setprecision(17);
  for (const auto& s : scores) {
    std::string bits;
    for (bool b : s.bits) bits.push_back(b ? '1' : '0');
    if (bits.empty()) bits = "-";
    out << bits << ',' << s.score << ',' << (s.is_truth ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace entropic
