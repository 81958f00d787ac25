#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "entropic/errors.hpp"
#include "entropic/probcore.hpp"
#include "entropic/rng.hpp"

using namespace entropic;

TEST_CASE("entropy of simple distributions") {
  CHECK(entropy(Categorical({0.5, 0.5})) == doctest::Approx(1.0));
  CHECK(entropy(Categorical({1.0, 0.0, 0.0})) == 0.0);
  CHECK(entropy(Categorical({0.5, 0.25, 0.25})) == doctest::Approx(1.5));
}

TEST_CASE("Categorical rejects invalid masses") {
  CHECK_THROWS_AS(Categorical(std::vector<double>{}), InvalidParameter);
  CHECK_THROWS_AS(Categorical({0.5, 0.6}), InvalidParameter);
  CHECK_THROWS_AS(Categorical({1.1, -0.1}), InvalidParameter);
  CHECK_THROWS_AS(Categorical::from_weights({0.0, 0.0}), InvalidParameter);
  CHECK(Categorical::from_weights({1.0, 3.0})[1] == doctest::Approx(0.75));
  CHECK(Categorical::point_mass(3, 2).support_size() == 1);
  CHECK(entropy(Categorical::uniform(8)) == doctest::Approx(3.0));
}

TEST_CASE("entropy is bounded and permutation invariant") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 1 + rng.uniform_int(12);
    auto p = dirichlet_sample(k, 0.3 + rng.uniform(), rng);
    const double h = entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(static_cast<double>(k)) + 1e-12);
    auto q = p.probs();
    rng.shuffle(q);
    CHECK(entropy_bits(q) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("dirichlet_sample") {
  Rng rng(3);
  SUBCASE("degenerate simplex") {
    for (double a : {1e-3, 1.0, 50.0}) {
      auto p = dirichlet_sample(1, a, rng);
      CHECK(p.size() == 1);
      CHECK(p[0] == 1.0);
    }
  }
  SUBCASE("large concentration is near uniform") {
    for (int t = 0; t < 100; ++t) CHECK(entropy(dirichlet_sample(4, 1e6, rng)) >= 1.99);
  }
  SUBCASE("small concentration is near a point mass") {
    int low = 0;
    for (int t = 0; t < 100; ++t) low += entropy(dirichlet_sample(4, 1e-4, rng)) <= 0.05;
    CHECK(low >= 95);
  }
  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS(dirichlet_sample(0, 1.0, rng), InvalidParameter);
    CHECK_THROWS_AS(dirichlet_sample(3, 0.0, rng), InvalidParameter);
    CHECK_THROWS_AS(dirichlet_sample(3, -1.0, rng), InvalidParameter);
  }
  SUBCASE("outputs are valid categoricals") {
    for (int t = 0; t < 300; ++t) {
      auto p = dirichlet_sample(1 + rng.uniform_int(20), std::exp(rng.uniform() * 12 - 8), rng);
      double s = 0;
      for (double x : p.probs()) {
        CHECK(x >= 0.0);
        s += x;
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("entropy_targeted_dirichlet") {
  Rng rng(5);
  SUBCASE("hits the band") {
    for (int t = 0; t < 10; ++t) {
      const double h = entropy(entropy_targeted_dirichlet(16, 1.0, 0.05, rng));
      CHECK(h >= 0.95);
      CHECK(h <= 1.05);
    }
  }
  SUBCASE("zero target") {
    CHECK(entropy(entropy_targeted_dirichlet(8, 0.0, 0.05, rng)) <= 0.05);
  }
  SUBCASE("several targets and sizes") {
    for (std::size_t k : {2u, 5u, 10u, 32u}) {
      for (double target : {0.3, 0.8, 1.5, 3.0}) {
        if (target > std::log2(static_cast<double>(k)) - 0.05) {
          CHECK_THROWS_AS(entropy_targeted_dirichlet(k, target, 0.05, rng), TargetUnreachable);
          continue;
        }
        const double h = entropy(entropy_targeted_dirichlet(k, target, 0.05, rng));
        CHECK(std::abs(h - target) <= 0.05);
      }
    }
  }
  SUBCASE("unreachable target") {
    CHECK_THROWS_AS(entropy_targeted_dirichlet(4, 2.0, 0.05, rng), TargetUnreachable);
  }
  SUBCASE("invalid tolerance or target") {
    CHECK_THROWS_AS(entropy_targeted_dirichlet(4, 1.0, 0.0, rng), InvalidParameter);
    CHECK_THROWS_AS(entropy_targeted_dirichlet(4, -0.5, 0.05, rng), InvalidParameter);
  }
  SUBCASE("rejection cap exhausted") {
    TargetedDirichletOptions opts;
    opts.rejection_cap = 1;
    opts.bisection_steps = 0;  // alpha stays at the geometric middle of the bracket
    bool failed = false;
    for (int t = 0; t < 20 && !failed; ++t) {
      try {
        (void)entropy_targeted_dirichlet(32, 0.5, 0.001, rng, opts);
      } catch (const ConvergenceFailure& e) {
        failed = true;
        CHECK(e.best.size() == 32);
        CHECK(e.best_entropy == doctest::Approx(entropy_bits(e.best)));
      }
    }
    CHECK(failed);
  }
}

TEST_CASE("rng determinism") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs |= x != c.next_u64();
  }
  CHECK(differs);
  // First output of the standard 64-bit Mersenne Twister with its default seed.
  Rng d(5489);
  CHECK(d.next_u64() == 14514284786278117030ULL);
  CHECK(derive_seed(1, "cell", 0) == derive_seed(1, "cell", 0));
  CHECK(derive_seed(1, "cell", 0) != derive_seed(1, "cell", 1));
  CHECK(derive_seed(1, "cell", 0) != derive_seed(2, "cell", 0));
  CHECK(derive_seed(1, "cell-a", 0) != derive_seed(1, "cell-b", 0));
  Rng e(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = e.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(e.uniform_int(7) < 7);
  }
}

TEST_CASE("rng distributions have the right moments") {
  Rng rng(17);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  for (double shape : {0.3, 1.0, 4.5}) {
    double m = 0;
    for (int i = 0; i < n; ++i) m += std::exp(rng.log_gamma_draw(shape));
    CHECK(m / n == doctest::Approx(shape).epsilon(0.03));
  }
  std::vector<int> counts(3);
  for (int i = 0; i < 30000; ++i) ++counts[rng.categorical({1.0, 2.0, 7.0})];
  CHECK(counts[0] / 30000.0 == doctest::Approx(0.1).epsilon(0.1));
  CHECK(counts[2] / 30000.0 == doctest::Approx(0.7).epsilon(0.03));
}

TEST_CASE("empirical_conditionals") {
  SUBCASE("deterministic copy gives point masses") {
    Dataset d({"X", "Y"}, {3, 3}, {{0, 1, 2, 1, 0}, {0, 1, 2, 1, 0}});
    const int given[] = {0};
    auto entries = empirical_conditionals(d, 1, given);
    CHECK(entries.size() == 3);
    for (const auto& e : entries) {
      CHECK(e.conditional.support_size() == 1);
      CHECK(e.conditional[e.config[0]] == 1.0);
    }
  }
  SUBCASE("empty conditioning set gives the marginal") {
    Dataset d({"X", "Y"}, {2, 3}, {{0, 1, 1, 0}, {0, 2, 2, 1}});
    auto entries = empirical_conditionals(d, 1, std::span<const int>{});
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].config.empty());
    CHECK(entries[0].weight == 1.0);
    CHECK(entries[0].conditional.probs() == std::vector<double>{0.25, 0.25, 0.5});
  }
  SUBCASE("balanced 2x2 table") {
    Dataset d({"X", "Y"}, {2, 2}, {{0, 0, 1, 1}, {0, 1, 0, 1}});
    const int given[] = {0};
    auto entries = empirical_conditionals(d, 1, given);
    REQUIRE(entries.size() == 2);
    for (const auto& e : entries) {
      CHECK(e.weight == 0.5);
      CHECK(e.conditional.probs() == std::vector<double>{0.5, 0.5});
    }
  }
  SUBCASE("smoothing adds pseudo-counts") {
    Dataset d({"X", "Y"}, {1, 2}, {{0, 0}, {0, 0}});
    const int given[] = {0};
    auto entries = empirical_conditionals(d, 1, given, 1.0);
    CHECK(entries[0].conditional[0] == doctest::Approx(0.75));
    CHECK(entries[0].conditional[1] == doctest::Approx(0.25));
  }
  SUBCASE("errors") {
    Dataset empty({"X", "Y"}, {2, 2}, {{}, {}});
    const int given[] = {0};
    CHECK_THROWS_AS(empirical_conditionals(empty, 1, given), InsufficientData);
    Dataset d({"X", "Y"}, {2, 2}, {{0, 1}, {1, 0}});
    const int self[] = {1};
    CHECK_THROWS_AS(empirical_conditionals(d, 1, self), InvalidParameter);
    const int bad[] = {5};
    CHECK_THROWS_AS(empirical_conditionals(d, 1, bad), InvalidParameter);
    CHECK_THROWS_AS(empirical_conditionals(d, 1, given, -1.0), InvalidParameter);
  }
}

TEST_CASE("empirical_conditionals recompose the joint") {
  // Oracle: joint frequency counted directly from the rows.
  Rng rng(8);
  const std::size_t n = 500;
  std::vector<std::vector<int>> cols(3, std::vector<int>(n));
  for (std::size_t r = 0; r < n; ++r) {
    cols[0][r] = static_cast<int>(rng.uniform_int(3));
    cols[1][r] = static_cast<int>(rng.uniform_int(2));
    cols[2][r] = (cols[0][r] + static_cast<int>(rng.uniform_int(2))) % 4;
  }
  Dataset d({"A", "B", "C"}, {3, 2, 4}, cols);
  std::map<std::vector<int>, double> joint;
  for (std::size_t r = 0; r < n; ++r) joint[{cols[0][r], cols[1][r], cols[2][r]}] += 1.0 / n;
  const int given[] = {0, 1};
  double total = 0;
  for (const auto& e : empirical_conditionals(d, 2, given)) {
    for (int c = 0; c < 4; ++c) {
      const double p = e.weight * e.conditional[c];
      total += p;
      auto it = joint.find({e.config[0], e.config[1], c});
      CHECK(p == doctest::Approx(it == joint.end() ? 0.0 : it->second).epsilon(1e-12));
    }
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("weighted rows act as probabilities") {
  Dataset d({"X", "Y"}, {2, 2}, {{0, 0, 1}, {0, 1, 1}}, {0.2, 0.3, 0.5});
  CHECK(d.total_weight() == doctest::Approx(1.0));
  const int given[] = {0};
  auto entries = empirical_conditionals(d, 1, given);
  CHECK(entries[0].weight == doctest::Approx(0.5));
  CHECK(entries[0].conditional[1] == doctest::Approx(0.6));
  CHECK(empirical_marginal(d, 1)[1] == doctest::Approx(0.8));
}

TEST_CASE("group_rows orders configurations lexicographically") {
  Dataset d({"A", "B"}, {2, 3}, {{1, 0, 1, 0}, {0, 2, 0, 1}});
  const int vars[] = {0, 1};
  auto g = group_rows(d, vars);
  REQUIRE(g.num_groups() == 3);
  CHECK(g.configs[0] == std::vector<int>{0, 1});
  CHECK(g.configs[1] == std::vector<int>{0, 2});
  CHECK(g.configs[2] == std::vector<int>{1, 0});
  CHECK(g.group_of_row == std::vector<int>{2, 1, 2, 0});
}

TEST_CASE("dataset CSV and schema") {
  const std::string text = "A,B\n0,1\n2,0\n1,1\n";
  Dataset d = parse_dataset_csv(text);
  CHECK(d.names() == std::vector<std::string>{"A", "B"});
  CHECK(d.cards() == std::vector<int>{3, 2});
  CHECK(d.num_rows() == 3);
  CHECK(dataset_to_csv(d) == text);
  Dataset wide = apply_schema(d, R"({"columns":["A","B"],"cards":[5,2]})");
  CHECK(wide.cards() == std::vector<int>{5, 2});
  CHECK(apply_schema(d, dataset_schema_json(wide)).cards() == wide.cards());
  CHECK_THROWS_AS(apply_schema(d, R"({"columns":["A","B"],"cards":[2,2]})"), InvalidParameter);
  CHECK_THROWS_AS(apply_schema(d, R"({"columns":["A","C"],"cards":[3,2]})"), InvalidParameter);

  auto line_of = [](const std::string& t) {
    try {
      parse_dataset_csv(t);
    } catch (const ParseError& e) {
      return e.line;
    }
    return 0;
  };
  CHECK(line_of("A,B\n0,1\n1\n") == 3);
  CHECK(line_of("A,B\n0,x\n") == 2);
  CHECK(line_of("A,B\n0,-1\n") == 2);
  CHECK(line_of("A,A\n0,1\n") == 1);
  CHECK(line_of("") == 1);
}
