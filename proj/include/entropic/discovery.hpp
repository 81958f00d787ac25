#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "entropic/citest.hpp"
#include "entropic/graphs.hpp"
#include "entropic/probcore.hpp"
#include "entropic/rng.hpp"

namespace entropic {

// What the pairwise oracle compares for a pair (i, j) given cond C.
//   exogenous: MEC(j | i,C)            vs MEC(i | j,C)
//   total:     MEC(i | C) + MEC(j | i,C) vs MEC(j | C) + MEC(i | j,C)
//   marginal:  MEC(i | C)              vs MEC(j | C)
enum class Measure { kExogenous, kMarginal, kTotal };

std::string to_string(Measure m);
Measure parse_measure(const std::string& s);

// Scores closer than this are treated as equal by the oracle, the
// enumeration argmin and the percentile count.
inline constexpr double kScoreTolerance = 1e-9;

struct OracleVerdict {
  int from;
  int to;
  double forward_score;  // cost of i -> j
  double reverse_score;  // cost of j -> i
  Measure measure;
};

// Orients i -> j iff forward < reverse, or the scores tie (within
// kScoreTolerance) and i < j.
OracleVerdict mec_oracle(const Dataset& data, int i, int j, std::span<const int> cond, Measure measure,
                         double smoothing = 0.0);

class CiBackend {
 public:
  virtual ~CiBackend() = default;
  virtual CiResult test(int i, int j, const std::vector<int>& cond) = 0;
};

class GTestBackend final : public CiBackend {
 public:
  GTestBackend(const Dataset& data, double alpha) : data_(data), alpha_(alpha) {}
  CiResult test(int i, int j, const std::vector<int>& cond) override { return g_test_ci(data_, i, j, cond, alpha_); }

 private:
  const Dataset& data_;
  double alpha_;
};

class DsepBackend final : public CiBackend {
 public:
  explicit DsepBackend(const Dag& truth) : truth_(truth) {}
  CiResult test(int i, int j, const std::vector<int>& cond) override { return dsep_ci(truth_, i, j, cond); }

 private:
  const Dag& truth_;
};

// Pairwise direction oracle; returns true for i -> j.
class DirectionOracle {
 public:
  virtual ~DirectionOracle() = default;
  virtual bool forward(int i, int j, const std::vector<int>& cond) = 0;
};

class MecOracle final : public DirectionOracle {
 public:
  MecOracle(const Dataset& data, Measure measure, double smoothing = 0.0)
      : data_(data), measure_(measure), smoothing_(smoothing) {}
  bool forward(int i, int j, const std::vector<int>& cond) override;

 private:
  const Dataset& data_;
  Measure measure_;
  double smoothing_;
};

// Answers from a known graph: orients from ancestor to descendant, and
// i -> j for i < j when neither reaches the other. Source-pathwise by
// construction.
class GroundTruthOracle final : public DirectionOracle {
 public:
  explicit GroundTruthOracle(const Dag& truth);
  bool forward(int i, int j, const std::vector<int>& cond) override;

 private:
  std::vector<std::vector<bool>> reach_;
};

struct DiscoveryConfig {
  enum class Ci { kGTest, kDSeparation };
  Measure measure = Measure::kTotal;
  Ci ci = Ci::kGTest;
  double alpha = 0.05;
  double smoothing = 0.0;
  std::size_t enumeration_cap = 1'000'000;
  std::size_t percentile_samples = 9'999;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PeelResult {
  Dag dag;
  std::vector<int> order;  // recovered topological order
  int oracle_calls = 0;
  int ci_tests = 0;
  // Rounds in which every candidate was eliminated and one was promoted.
  int fallbacks = 0;
};

// Sequential source peeling: find the current sources by CI tests given the
// sources found so far plus oracle calls on dependent pairs, append them to
// the order, repeat; then keep T(i) -> T(j) unless CI given the prefix.
PeelResult peel(const std::vector<std::string>& names, CiBackend& ci, DirectionOracle& oracle);

// Peeling on data with the MEC oracle. `truth` is required for the
// d-separation CI backend.
PeelResult peel(const Dataset& data, const DiscoveryConfig& config, const Dag* truth = nullptr);

// Orients every skeleton link from the earlier to the later node of `order`.
Dag orient_along(const Skeleton& s, const std::vector<int>& order);

// Peeling supported by a known skeleton: the recovered source order orients
// the skeleton's links and replaces the CI pruning phase.
PeelResult peel(const Dataset& data, const Skeleton& skeleton, const DiscoveryConfig& config,
                const Dag* truth = nullptr);

// Caches MEC(node | parents) by family.
class FamilyScorer {
 public:
  FamilyScorer(const Dataset& data, double smoothing) : data_(data), smoothing_(smoothing) {}
  double family(int node, const std::vector<int>& parents);
  // Sum over nodes of MEC(node | parents in g).
  double graph(const Dag& g);

 private:
  const Dataset& data_;
  double smoothing_;
  std::map<std::pair<int, std::vector<int>>, double> cache_;
};

struct ScoredOrientation {
  std::vector<bool> bits;
  double score;
  bool is_truth = false;
};

struct EnumerationResult {
  Dag best;
  double score;
  std::vector<ScoredOrientation> scores;  // enumeration order
};

// Scores every acyclic orientation by total minimum entropy and returns the
// least; ties go to the lexicographically smallest orientation vector.
EnumerationResult enumerate_discover(const Dataset& data, const Skeleton& skeleton, const DiscoveryConfig& config);

double percentile_from_counts(std::size_t strictly_better, std::size_t total);

struct PercentileResult {
  double percentile;
  std::size_t candidates;
  std::size_t strictly_better;
  double truth_score;
  bool sampled = false;      // orientations drawn from random orders
  bool underfilled = false;  // fewer samples than requested
  std::vector<ScoredOrientation> scores;
};

// Rank of the true graph's total entropy among orientations of the skeleton
// (all of them when enumerable within the cap, else the truth plus
// percentile_samples random-order orientations).
PercentileResult percentile(const Dataset& data, const Dag& truth, const Skeleton& skeleton,
                            const DiscoveryConfig& config, Rng& rng);

struct AnmResult {
  Dag dag;
  int all_dependent_rounds = 0;  // rounds where no candidate passed alpha
};

// Discrete additive-noise sink elimination over the skeleton with cyclic
// residuals and G-tests.
AnmResult anm_baseline(const Dataset& data, const Skeleton& skeleton, double alpha = 0.05);

// Scores as CSV: orientation bit string, score, is_truth.
std::string scores_to_csv(const std::vector<ScoredOrientation>& scores);

}  // namespace entropic
