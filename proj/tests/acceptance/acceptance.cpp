// End-to-end acceptance checks. Prints one PASS/FAIL line per check and
// exits non-zero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "entropic/bifio.hpp"
#include "entropic/citest.hpp"
#include "entropic/coupling.hpp"
#include "entropic/discovery.hpp"
#include "entropic/errors.hpp"
#include "entropic/experiment.hpp"
#include "entropic/graphs.hpp"
#include "entropic/probcore.hpp"
#include "entropic/scm.hpp"

using namespace entropic;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Categorical random_small_marginal(Rng& rng) {
  const std::size_t k = 1 + rng.uniform_int(3);
  std::vector<double> w(k);
  for (auto& x : w) x = rng.uniform() < 0.1 ? 0.0 : rng.uniform();
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
  return Categorical::from_weights(w);
}

Outcome coupling_suite() {
  Rng rng(101);
  int bad_lower = 0, bad_marginal = 0, bad_gap = 0;
  double worst_gap = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::vector<Categorical> ms{random_small_marginal(rng), random_small_marginal(rng)};
    const Coupling c = greedy_coupling(ms);
    if (c.entropy_bits < std::max(entropy(ms[0]), entropy(ms[1])) - 1e-12) ++bad_lower;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto proj = c.marginal(i, ms[i].size());
      for (std::size_t s = 0; s < proj.size(); ++s) {
        if (std::abs(proj[s] - ms[i][s]) > 1e-7) ++bad_marginal;
      }
    }
    const double gap = c.entropy_bits - bruteforce_coupling(ms[0], ms[1], 0.02);
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1.0) ++bad_gap;
  }
  std::ostringstream d;
  d << "below-marginal=" << bad_lower << " marginal-mismatch=" << bad_marginal << " over-1-bit=" << bad_gap
    << " worst greedy-optimum gap=" << fmt("%.4f", worst_gap) << " bits";
  return {bad_lower == 0 && bad_marginal == 0 && bad_gap == 0, d.str()};
}

std::vector<Dag> all_dags(std::size_t n) {
  std::vector<Edge> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  std::size_t total = 1;
  for (std::size_t k = 0; k < pairs.size(); ++k) total *= 3;
  std::vector<Dag> out;
  for (std::size_t code = 0; code < total; ++code) {
    std::vector<Edge> edges;
    std::size_t c = code;
    for (auto [a, b] : pairs) {
      const std::size_t t = c % 3;
      c /= 3;
      if (t == 1) edges.emplace_back(a, b);
      if (t == 2) edges.emplace_back(b, a);
    }
    try {
      out.emplace_back(n, edges);
    } catch (const InvalidParameter&) {
      // cyclic
    }
  }
  return out;
}

Outcome peel_contract() {
  std::vector<Dag> graphs;
  for (std::size_t n = 1; n <= 4; ++n) {
    auto g = all_dags(n);
    graphs.insert(graphs.end(), g.begin(), g.end());
  }
  const std::size_t exhaustive = graphs.size();
  Rng rng(202);
  for (int t = 0; t < 200; ++t) graphs.push_back(random_dag(5 + rng.uniform_int(4), 0.5, rng));
  int wrong = 0, over_budget = 0, max_calls = 0;
  for (const Dag& g : graphs) {
    DsepBackend ci(g);
    GroundTruthOracle oracle(g);
    const auto r = peel(g.names(), ci, oracle);
    const int n = static_cast<int>(g.num_nodes());
    if (shd(r.dag, g) != 0) ++wrong;
    if (r.oracle_calls > n * n) ++over_budget;
    max_calls = std::max(max_calls, r.oracle_calls);
  }
  std::ostringstream d;
  d << exhaustive << " exhaustive + 200 random graphs, SHD>0 on " << wrong << ", over |V|^2 calls on " << over_budget
    << ", max oracle calls " << max_calls;
  return {wrong == 0 && over_budget == 0, d.str()};
}

Outcome pairwise_identifiability() {
  const int n = 32;
  int correct = 0;
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng(derive_seed(303, "pairwise", static_cast<std::uint64_t>(inst)));
    std::vector<Mechanism> mechs(2);
    mechs[0].exo = Categorical::uniform(n);
    for (int e = 0; e < n; ++e) mechs[0].table.push_back(e);
    mechs[1].parents = {0};
    mechs[1].exo = entropy_targeted_dirichlet(n, 1.0, 0.05, rng);
    for (int k = 0; k < n * n; ++k) mechs[1].table.push_back(static_cast<int>(rng.uniform_int(n)));
    const Scm scm(Dag({"X", "Y"}, {{0, 1}}), {n, n}, mechs);
    const Dataset d = exact_joint(scm).to_dataset();
    correct += mec_oracle(d, 0, 1, {}, Measure::kExogenous).from == 0;
  }
  return {correct >= 95, std::to_string(correct) + "/100 oriented X->Y (need >= 95)"};
}

std::map<double, double> mean_shd_by_noise(const std::vector<ResultRecord>& recs, const std::string& method,
                                            const std::string& measure, int* failures) {
  std::map<double, std::pair<double, int>> acc;
  for (const auto& r : recs) {
    if (r.method != method || r.measure != measure) continue;
    if (r.shd < 0) {
      ++*failures;
      continue;
    }
    acc[r.noise].first += r.shd;
    acc[r.noise].second += 1;
  }
  std::map<double, double> out;
  for (const auto& [k, v] : acc) out[k] = v.first / v.second;
  return out;
}

Outcome triangle_reproduction() {
  ExperimentConfig c;
  c.id = "triangle-hes";
  c.graph = "triangle";
  c.n_states = 10;
  c.m_states = 10;
  c.noise = {0.5, 1.0, 3.3};
  c.noise_tol = 0.02;  // 3.3 bits is within 0.05 of log2(10) and so needs a tighter band
  c.samples = {10000};
  c.methods = {MethodSpec::parse("enumerate:total")};
  c.replicates = 25;
  c.seed = 404;
  c.high_entropy_sources = true;
  c.timing = false;
  int failures = 0;
  const auto means = mean_shd_by_noise(run_experiment(c), "enumerate", "total", &failures);
  const double low = std::max(means.at(0.5), means.at(1.0));
  const double high = means.at(3.3);
  std::ostringstream d;
  d << "mean SHD at 0.5/1.0/3.3 bits = " << fmt("%.2f", means.at(0.5)) << "/" << fmt("%.2f", means.at(1.0)) << "/"
    << fmt("%.2f", high) << ", failed replicates " << failures;
  return {failures == 0 && low <= 0.5 && high - low >= 0.5, d.str()};
}

Outcome anm_regime() {
  ExperimentConfig c;
  c.id = "anm-line";
  c.graph = "line";
  c.model = "anm";
  c.n_states = 10;
  c.noise = {1};
  c.samples = {1000};
  c.methods = {MethodSpec::parse("enumerate:total"), MethodSpec::parse("anm")};
  c.replicates = 25;
  c.seed = 505;
  c.timing = false;
  int failures = 0;
  const auto recs = run_experiment(c);
  const double ent = mean_shd_by_noise(recs, "enumerate", "total", &failures).at(1.0);
  const double anm = mean_shd_by_noise(recs, "anm", "", &failures).at(1.0);
  std::ostringstream d;
  d << "mean SHD enumerate " << fmt("%.2f", ent) << " vs anm " << fmt("%.2f", anm) << ", failed replicates "
    << failures;
  return {failures == 0 && ent <= anm + 0.5, d.str()};
}

Outcome measure_comparison() {
  ExperimentConfig c;
  c.id = "measures";
  c.graph = "complete-3";
  c.n_states = 10;
  c.m_states = 10;
  c.noise = {1.0};
  c.samples = {10000};
  c.methods = {MethodSpec::parse("peel:total"), MethodSpec::parse("peel:exogenous")};
  c.replicates = 50;
  c.seed = 606;
  c.timing = false;
  int failures = 0;
  const auto recs = run_experiment(c);
  const double total = mean_shd_by_noise(recs, "peel", "total", &failures).at(1.0);
  const double exo = mean_shd_by_noise(recs, "peel", "exogenous", &failures).at(1.0);
  std::ostringstream d;
  d << "mean SHD total " << fmt("%.2f", total) << " vs exogenous " << fmt("%.2f", exo) << ", failed replicates "
    << failures;
  return {failures == 0 && total <= exo + 0.1, d.str()};
}

Outcome percentile_behaviour() {
  const bool arithmetic = percentile_from_counts(5, 100) == 0.95;
  int top = 0;
  for (int inst = 0; inst < 25; ++inst) {
    Rng rng(derive_seed(707, "percentile", static_cast<std::uint64_t>(inst)));
    const Dag truth = triangle_graph();
    const Scm scm = random_scm(truth, 10, 10, NoiseSpec::targeted(1.0), false, rng);
    const Dataset d = exact_joint(scm).to_dataset();
    top += percentile(d, truth, Skeleton(truth), DiscoveryConfig{}, rng).percentile == 1.0;
  }
  std::ostringstream d;
  d << "percentile(5 of 100) " << (arithmetic ? "= 0.95" : "!= 0.95") << ", percentile 1.0 in " << top
    << "/25 (need >= 22)";
  return {arithmetic && top >= 22, d.str()};
}

Outcome bif_round_trip() {
  const std::string dir = ENTROPIC_TEST_DATA;
  int parsed = 0, bad_rows = 0, tv_fail = 0;
  double worst_tv = 0.0;
  Rng rng(808);
  for (const char* name : {"cancer", "earthquake", "chain", "rounded"}) {
    const BayesNet net = read_bif(dir + "/" + name + ".bif");
    ++parsed;
    for (std::size_t v = 0; v < net.num_vars(); ++v) {
      std::size_t configs = 1;
      for (int p : net.parents[v]) configs *= static_cast<std::size_t>(net.card(p));
      if (net.cpts[v].size() != configs) ++bad_rows;
      for (const auto& row : net.cpts[v]) {
        double s = 0.0;
        for (double p : row.probs()) s += p;
        if (std::abs(s - 1.0) > 1e-6) ++bad_rows;
      }
    }
    // Exact marginals by exhaustive enumeration of joint configurations.
    const std::size_t n = net.num_vars();
    std::vector<std::vector<double>> exact(n);
    for (std::size_t v = 0; v < n; ++v) exact[v].assign(net.card(static_cast<int>(v)), 0.0);
    std::vector<int> values(n, 0);
    for (bool done = false; !done;) {
      double p = 1.0;
      for (std::size_t v = 0; v < n; ++v) p *= net.cpts[v][net.config_index(static_cast<int>(v), values)][values[v]];
      for (std::size_t v = 0; v < n; ++v) exact[v][values[v]] += p;
      done = true;
      for (std::size_t k = n; k-- > 0;) {
        if (++values[k] < net.card(static_cast<int>(k))) {
          done = false;
          break;
        }
        values[k] = 0;
      }
    }
    const Dataset d = bn_sample(net, 100000, rng);
    for (std::size_t v = 0; v < n; ++v) {
      const Categorical emp = empirical_marginal(d, static_cast<int>(v));
      double tv = 0.0;
      for (std::size_t s = 0; s < exact[v].size(); ++s) tv += std::abs(exact[v][s] - emp[s]);
      tv /= 2;
      worst_tv = std::max(worst_tv, tv);
      if (tv > 0.01) ++tv_fail;
    }
  }

  const char* two = "variable A { type discrete [ 2 ] { x, y }; }\nvariable B { type discrete [ 2 ] { x, y }; }\n";
  const std::vector<std::pair<std::string, int>> malformed{
      {"variable A { type discrete [ 2 ] { x, y };\nprobability ( A ) { table 0.5, 0.5; }\n", 2},
      {"variable A { type discrete [ 2 ] { x, y }; }\nprobability ( A ) {\n  table 0.2, 0.3, 0.5;\n}\n", 3},
      {std::string(two) + "probability ( A | B ) { (x) 0.5, 0.5; (y) 0.5, 0.5; }\n"
                          "probability ( B | A ) { (x) 0.5, 0.5; (y) 0.5, 0.5; }\n",
       3},
      {"variable A { type discrete [ 2 ] { x, y }; }\nprobability ( A | Q ) {\n (x) 0.5, 0.5;\n}\n", 2},
      {"variable A { type discrete [ 2 ] { x, y }; }\n\nvariable A { type discrete [ 2 ] { x, y }; }\n", 3},
      {"variable A { type discrete [ 2 ] { x, y }; }\nprobability ( A ) {\n\n  table 0.5, 0.7;\n}\n", 4},
      {std::string(two) + "probability ( A ) { table 0.5, 0.5; }\nprobability ( B | A ) {\n  (x) 0.5, 0.5;\n"
                          "  (z) 0.5, 0.5;\n}\n",
       6},
      {std::string(two) + "probability ( A ) { table 0.5, 0.5; }\nprobability ( B | A ) {\n  (x) 0.5, 0.5;\n}\n", 4},
      {"variable A {\n  type discrete [ 3 ] { x, y };\n}\n", 2},
      {std::string(two) + "probability ( A ) { table 0.5, 0.5; }\n", 2},
  };
  int rejected = 0;
  for (const auto& [text, line] : malformed) {
    try {
      parse_bif(text);
    } catch (const ParseError& e) {
      rejected += e.line == line && std::string(e.what()).rfind("line " + std::to_string(line) + ":", 0) == 0;
    }
  }
  std::ostringstream d;
  d << parsed << " fixtures parsed, invalid CPT rows " << bad_rows << ", worst marginal TV "
    << fmt("%.4f", worst_tv) << ", malformed rejected at the right line " << rejected << "/" << malformed.size();
  return {parsed == 4 && bad_rows == 0 && tv_fail == 0 && rejected == static_cast<int>(malformed.size()), d.str()};
}

Outcome ci_calibration() {
  Rng rng(909);
  int rejections = 0;
  const std::size_t n = 10000;
  for (int t = 0; t < 500; ++t) {
    std::vector<int> x(n), y(n);
    for (std::size_t r = 0; r < n; ++r) {
      x[r] = static_cast<int>(rng.uniform_int(2));
      y[r] = static_cast<int>(rng.uniform_int(2));
    }
    rejections += !g_test_ci(Dataset({"X", "Y"}, {2, 2}, {x, y}), 0, 1, {}, 0.05).independent;
  }
  const double rate = rejections / 500.0;
  return {rate >= 0.02 && rate <= 0.10, "type-I error " + fmt("%.3f", rate) + " (need [0.02, 0.10])"};
}

Outcome determinism() {
  ExperimentConfig c;
  c.id = "determinism";
  c.graph = "diamond";
  c.n_states = 5;
  c.m_states = 5;
  c.noise = {0.5, 1.5};
  c.samples = {1000};
  c.methods = {MethodSpec::parse("enumerate:total"), MethodSpec::parse("peel:exogenous"), MethodSpec::parse("anm")};
  c.replicates = 5;
  c.seed = 1010;
  c.timing = false;
  const std::string a = results_to_csv(run_experiment(c, 1));
  const std::string b = results_to_csv(run_experiment(c, 1));
  const std::string p = results_to_csv(run_experiment(c, 3));
  std::ostringstream d;
  d << "serial reruns " << (a == b ? "identical" : "differ") << ", parallel " << (a == p ? "identical" : "differs")
    << " (" << a.size() << " bytes)";
  return {a == b && a == p, d.str()};
}

}  // namespace

int main() {
  struct Check {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Check> checks{
      {1, "coupling correctness", 60, coupling_suite},
      {2, "peeling with perfect CI and oracle", 60, peel_contract},
      {3, "pairwise identifiability", 120, pairwise_identifiability},
      {4, "triangle noise sweep", 900, triangle_reproduction},
      {5, "ANM regime comparison", 600, anm_regime},
      {6, "peeling measure comparison", 600, measure_comparison},
      {7, "percentile", 300, percentile_behaviour},
      {8, "BIF round trip", 60, bif_round_trip},
      {9, "CI calibration", 120, ci_calibration},
      {10, "experiment determinism", 600, determinism},
  };
  int failed = 0;
  for (const auto& c : checks) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] %2d %s: %s; %.1fs (limit %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.limit_s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu checks passed\n", static_cast<int>(checks.size()) - failed, checks.size());
  return failed == 0 ? 0 : 1;
}
