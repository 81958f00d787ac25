#include <doctest.h>

#include <cmath>
#include <map>

#include "entropic/errors.hpp"
#include "entropic/scm.hpp"

using namespace entropic;

namespace {

// P(node = x | parents) read off the mechanism directly.
double node_conditional(const Scm& scm, int v, const std::vector<int>& values) {
  const auto& m = scm.mechanism(v);
  std::size_t cfg = 0;
  for (int p : m.parents) cfg = cfg * static_cast<std::size_t>(scm.n_states(p)) + static_cast<std::size_t>(values[p]);
  double prob = 0;
  for (std::size_t e = 0; e < m.exo.size(); ++e) {
    if (m.table[cfg * m.exo.size() + e] == values[v]) prob += m.exo[e];
  }
  return prob;
}

// Joint over every value assignment by the chain rule.
std::map<std::vector<int>, double> brute_joint(const Scm& scm) {
  std::map<std::vector<int>, double> out;
  const std::size_t n = scm.num_nodes();
  std::vector<int> values(n, 0);
  for (;;) {
    double p = 1;
    for (std::size_t v = 0; v < n && p > 0; ++v) p *= node_conditional(scm, static_cast<int>(v), values);
    if (p > 0) out[values] = p;
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++values[k] < scm.n_states(static_cast<int>(k))) break;
      values[k] = 0;
      if (k == 0) return out;
    }
    if (n == 0) return out;
  }
}

double tv_sample_vs(const Dataset& d, const std::map<std::vector<int>, double>& joint) {
  std::map<std::vector<int>, double> emp;
  for (std::size_t r = 0; r < d.num_rows(); ++r) {
    std::vector<int> row(d.num_vars());
    for (std::size_t v = 0; v < d.num_vars(); ++v) row[v] = d.at(r, v);
    emp[row] += 1.0 / static_cast<double>(d.num_rows());
  }
  double tv = 0;
  for (const auto& [k, p] : joint) {
    auto it = emp.find(k);
    tv += std::abs(p - (it == emp.end() ? 0.0 : it->second));
  }
  for (const auto& [k, p] : emp) {
    if (!joint.count(k)) tv += p;
  }
  return tv / 2;
}

Scm copy_chain(int n) {
  std::vector<Mechanism> mechs(2);
  mechs[0].exo = Categorical::uniform(n);
  for (int e = 0; e < n; ++e) mechs[0].table.push_back(e);
  mechs[1].parents = {0};
  for (int x = 0; x < n; ++x) mechs[1].table.push_back(x);
  return Scm(Dag(2, {{0, 1}}), {n, n}, mechs);
}

}  // namespace

TEST_CASE("Scm validation") {
  std::vector<Mechanism> mechs(2);
  mechs[0].table = {0};
  mechs[1].parents = {0};
  mechs[1].table = {0, 1};
  CHECK_NOTHROW(Scm(Dag(2, {{0, 1}}), {2, 2}, mechs));
  CHECK_THROWS_AS(Scm(Dag(2, {}), {2, 2}, mechs), InvalidParameter);
  auto bad = mechs;
  bad[1].table = {0, 2};
  CHECK_THROWS_AS(Scm(Dag(2, {{0, 1}}), {2, 2}, bad), InvalidParameter);
  bad = mechs;
  bad[1].table = {0};
  CHECK_THROWS_AS(Scm(Dag(2, {{0, 1}}), {2, 2}, bad), InvalidParameter);
}

TEST_CASE("random_scm") {
  Rng rng(1);
  SUBCASE("trivial exogenous state makes the node deterministic") {
    const Scm scm = random_scm(Dag(1, {}), 4, 1, NoiseSpec::targeted(0.0), false, rng);
    const auto joint = exact_joint(scm);
    REQUIRE(joint.probs.size() == 1);
    CHECK(joint.probs[0] == 1.0);
  }
  SUBCASE("exogenous entropies hit the target") {
    const Scm scm = random_scm(line_graph(3), 10, 10, NoiseSpec::targeted(1.0), false, rng);
    for (int v = 0; v < 3; ++v) CHECK(std::abs(entropy(scm.mechanism(v).exo) - 1.0) <= 0.05);
  }
  SUBCASE("table shape") {
    const Scm scm = random_scm(Dag(3, {{0, 2}, {1, 2}}), 10, 10, NoiseSpec::targeted(1.0), false, rng);
    CHECK(scm.mechanism(2).table.size() == 1000);
    CHECK(scm.mechanism(0).table.size() == 10);
    for (int x : scm.mechanism(2).table) {
      CHECK(x >= 0);
      CHECK(x < 10);
    }
  }
  SUBCASE("high-entropy sources") {
    const Scm scm = random_scm(triangle_graph(), 10, 20, NoiseSpec::targeted(0.5), true, rng);
    CHECK(std::abs(entropy(scm.mechanism(0).exo) - kHighEntropySourceBits) <= 0.05);
    CHECK(std::abs(entropy(scm.mechanism(1).exo) - 0.5) <= 0.05);
    CHECK(std::abs(entropy(scm.mechanism(2).exo) - 0.5) <= 0.05);
    CHECK_THROWS_AS(random_scm(triangle_graph(), 10, 10, NoiseSpec::targeted(0.5), true, rng), TargetUnreachable);
  }
  SUBCASE("cyclic noise kind") {
    const Scm scm = random_scm(line_graph(2), 10, 10, NoiseSpec::cyclic(1), false, rng);
    CHECK(entropy(scm.mechanism(1).exo) == doctest::Approx(std::log2(3.0)));
  }
  SUBCASE("seeded determinism") {
    Rng a(5), b(5);
    const Scm x = random_scm(hall_graph(), 6, 6, NoiseSpec::targeted(1.0), false, a);
    const Scm y = random_scm(hall_graph(), 6, 6, NoiseSpec::targeted(1.0), false, b);
    CHECK(scm_to_json(x) == scm_to_json(y));
    Rng s1(9), s2(9);
    CHECK(dataset_to_csv(sample(x, 100, s1)) == dataset_to_csv(sample(y, 100, s2)));
  }
}

TEST_CASE("anm_scm") {
  Rng rng(2);
  CHECK(entropy(anm_scm(line_graph(2), 10, 1, rng).mechanism(1).exo) == doctest::Approx(std::log2(3.0)));
  CHECK(entropy(anm_scm(line_graph(2), 10, 2, rng).mechanism(1).exo) == doctest::Approx(std::log2(5.0)));
  const Scm det = anm_scm(line_graph(3), 10, 0, rng);
  for (int v = 0; v < 3; ++v) CHECK(entropy(det.mechanism(v).exo) == 0.0);
  CHECK_THROWS_AS(anm_scm(line_graph(2), 4, 2, rng), InvalidParameter);
  CHECK_THROWS_AS(anm_scm(line_graph(2), 4, -1, rng), InvalidParameter);

  // Each conditional is the uniform window {f-k, ..., f+k} mod n.
  for (int k : {0, 1, 2, 3}) {
    const int n = 9;
    const Scm scm = anm_scm(Dag(3, {{0, 2}, {1, 2}}), n, k, rng);
    const auto& m = scm.mechanism(2);
    for (std::size_t cfg = 0; cfg < scm.num_configs(2); ++cfg) {
      std::vector<double> cond(n, 0.0);
      for (std::size_t e = 0; e < m.exo.size(); ++e) cond[scm.evaluate(2, cfg, e)] += m.exo[e];
      int center = -1;
      for (int c = 0; c < n && center < 0; ++c) {
        bool ok = true;
        for (int d = -k; d <= k; ++d) ok &= std::abs(cond[((c + d) % n + n) % n] - 1.0 / (2 * k + 1)) < 1e-12;
        if (ok) center = c;
      }
      CHECK(center >= 0);
      double outside = 0;
      for (int x = 0; x < n; ++x) {
        const int off = ((x - center) % n + n) % n;
        if (off > k && off < n - k) outside += cond[x];
      }
      CHECK(outside == 0.0);
    }
  }
}

TEST_CASE("sample") {
  Rng rng(3);
  SUBCASE("deterministic model repeats one row") {
    std::vector<Mechanism> mechs(2);
    mechs[0].table = {2};
    mechs[1].parents = {0};
    mechs[1].table = {1, 0, 1};
    const Scm scm(Dag(2, {{0, 1}}), {3, 2}, mechs);
    const Dataset d = sample(scm, 50, rng);
    for (std::size_t r = 0; r < d.num_rows(); ++r) {
      CHECK(d.at(r, 0) == 2);
      CHECK(d.at(r, 1) == 1);
    }
  }
  SUBCASE("identity chain copies") {
    const Dataset d = sample(copy_chain(5), 500, rng);
    CHECK(d.column(0) == d.column(1));
  }
  SUBCASE("fair binary node") {
    std::vector<Mechanism> mechs(1);
    mechs[0].exo = Categorical({0.5, 0.5});
    mechs[0].table = {0, 1};
    const Dataset d = sample(Scm(Dag(1, {}), {2}, mechs), 100000, rng);
    double zeros = 0;
    for (int x : d.column(0)) zeros += x == 0;
    CHECK(zeros / 100000 >= 0.49);
    CHECK(zeros / 100000 <= 0.51);
  }
  SUBCASE("rejects zero samples") { CHECK_THROWS_AS(sample(copy_chain(2), 0, rng), InvalidParameter); }
}

TEST_CASE("exact_joint") {
  Rng rng(4);
  SUBCASE("copy model sits on the diagonal") {
    const auto j = exact_joint(copy_chain(4));
    CHECK(j.probs.size() == 4);
    for (const auto& cfg : j.configs) CHECK(cfg[0] == cfg[1]);
  }
  SUBCASE("independent nodes give the product") {
    const Scm scm = random_scm(Dag(2, {}), 4, 4, NoiseSpec::targeted(1.0), false, rng);
    const auto j = exact_joint(scm);
    for (std::size_t k = 0; k < j.configs.size(); ++k) {
      const auto& c = j.configs[k];
      CHECK(j.probs[k] == doctest::Approx(node_conditional(scm, 0, c) * node_conditional(scm, 1, c)));
    }
  }
  SUBCASE("matches the chain-rule oracle and the sampler") {
    for (int t = 0; t < 5; ++t) {
      const Scm scm = random_scm(t % 2 ? triangle_graph() : diamond_graph(), 3, 4, NoiseSpec::targeted(1.0), false, rng);
      const auto oracle = brute_joint(scm);
      const auto j = exact_joint(scm);
      double total = 0;
      REQUIRE(j.configs.size() == oracle.size());
      for (std::size_t k = 0; k < j.configs.size(); ++k) {
        CHECK(j.probs[k] == doctest::Approx(oracle.at(j.configs[k])).epsilon(1e-12));
        total += j.probs[k];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(tv_sample_vs(sample(scm, 1000000, rng), oracle) <= 0.01);
    }
  }
  SUBCASE("source marginal equals its induced distribution") {
    const Scm scm = random_scm(triangle_graph(), 5, 5, NoiseSpec::targeted(1.0), false, rng);
    const auto j = exact_joint(scm);
    std::vector<double> marg(5, 0.0);
    for (std::size_t k = 0; k < j.configs.size(); ++k) marg[j.configs[k][0]] += j.probs[k];
    for (int x = 0; x < 5; ++x) CHECK(marg[x] == doctest::Approx(node_conditional(scm, 0, {x, 0, 0})));
  }
  SUBCASE("weighted dataset view") {
    const auto d = exact_joint(copy_chain(3)).to_dataset();
    CHECK(d.weighted());
    CHECK(d.total_weight() == doctest::Approx(1.0));
  }
  SUBCASE("capacity") {
    const Scm scm = random_scm(Dag(8, {}), 10, 1, NoiseSpec::targeted(0.0), false, rng);
    CHECK_THROWS_AS(exact_joint(scm), CapacityError);
  }
}

TEST_CASE("support_check") {
  CHECK(support_check(Categorical::uniform(5), 5, 0.2));
  CHECK_FALSE(support_check(Categorical::point_mass(3, 0), 2, 0.1));
  CHECK(support_check(Categorical({0.5, 0.3, 0.2}), 2, 0.25));
}

TEST_CASE("scm JSON round trip") {
  Rng rng(6);
  const Scm scm = random_scm(diamond_graph(), 4, 3, NoiseSpec::targeted(0.8), false, rng);
  const std::string text = scm_to_json(scm);
  const Scm back = scm_from_json(text);
  CHECK(scm_to_json(back) == text);
  CHECK(back.graph() == scm.graph());
  CHECK_THROWS_AS(scm_from_json("{}"), InvalidParameter);
}
