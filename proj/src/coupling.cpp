#include "entropic/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "entropic/errors.hpp"

namespace entropic {

namespace {

constexpr double kResidualEps = 1e-12;

struct Entry {
  double mass;
  int state;
};

// Max-heap on mass; equal masses pop the smaller state first.
struct EntryLess {
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.mass != b.mass) return a.mass < b.mass;
    return a.state > b.state;
  }
};

using Heap = std::priority_queue<Entry, std::vector<Entry>, EntryLess>;

// Runs the greedy recursion; `emit` receives (top states, mass) per cell.
template <class Emit>
void run_greedy(std::span<const Categorical> marginals, Emit&& emit) {
  if (marginals.empty()) throw InvalidParameter("greedy coupling needs at least one marginal");
  const std::size_t m = marginals.size();
  std::vector<Heap> heaps(m);
  std::size_t budget = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& p = marginals[i].probs();
    for (std::size_t s = 0; s < p.size(); ++s) {
      if (p[s] > 0.0) {
        heaps[i].push({p[s], static_cast<int>(s)});
        ++budget;
      }
    }
  }

  std::vector<int> tops(m);
  double remaining = 1.0;
  for (std::size_t iter = 0; iter < budget && remaining >= kResidualEps; ++iter) {
    double w = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (heaps[i].empty()) return;
      tops[i] = heaps[i].top().state;
      w = std::min(w, heaps[i].top().mass);
    }
    emit(tops, w);
    remaining -= w;
    for (std::size_t i = 0; i < m; ++i) {
      Entry e = heaps[i].top();
      heaps[i].pop();
      e.mass -= w;
      if (e.mass > 0.0) heaps[i].push(e);
    }
  }
}

}  // namespace

std::vector<double> Coupling::marginal(std::size_t i, std::size_t k) const {
  std::vector<double> out(k, 0.0);
  for (const auto& c : cells) out.at(c.index.at(i)) += c.mass;
  return out;
}

Coupling greedy_coupling(std::span<const Categorical> marginals) {
  Coupling out;
  out.marginal_count = marginals.size();
  double total = 0.0;
  run_greedy(marginals, [&](const std::vector<int>& tops, double w) {
    out.cells.push_back({tops, w});
    total += w;
  });
  std::vector<double> masses;
  masses.reserve(out.cells.size());
  for (auto& c : out.cells) {
    c.mass /= total;
    masses.push_back(c.mass);
  }
  out.entropy_bits = entropy_bits(masses);
  return out;
}

double greedy_coupling_entropy(std::span<const Categorical> marginals) {
  std::vector<double> masses;
  double total = 0.0;
  run_greedy(marginals, [&](const std::vector<int>&, double w) {
    masses.push_back(w);
    total += w;
  });
  for (auto& x : masses) x /= total;
  return entropy_bits(masses);
}

namespace {

// Solves a small dense square system in place; false when singular.
bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-12) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

double clamped_entropy(std::vector<double> cells) {
  for (auto& c : cells) c = std::max(c, 0.0);
  return entropy_bits(cells);
}

}  // namespace

double bruteforce_coupling(const Categorical& p, const Categorical& q, double grid) {
  if (p.size() > 3 || q.size() > 3) throw UnsupportedSize("brute-force coupling supports at most 3 states per marginal");
  if (!(grid > 0.0) || grid > 0.1) throw InvalidParameter("grid resolution must be in (0, 0.1]");
  const std::size_t a = p.size();
  const std::size_t b = q.size();
  const std::size_t cells = a * b;
  double best = std::numeric_limits<double>::infinity();

  // Vertices: basic feasible solutions supported on a+b-1 cells. Constraints
  // are all row sums and the first b-1 column sums (the last is implied).
  const std::size_t rank = a + b - 1;
  std::vector<std::vector<double>> constraint(rank, std::vector<double>(cells, 0.0));
  std::vector<double> rhs(rank);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < b; ++j) constraint[i][i * b + j] = 1.0;
    rhs[i] = p[i];
  }
  for (std::size_t j = 0; j + 1 < b; ++j) {
    for (std::size_t i = 0; i < a; ++i) constraint[a + j][i * b + j] = 1.0;
    rhs[a + j] = q[j];
  }
  for (unsigned mask = 0; mask < (1u << cells); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != rank) continue;
    std::vector<std::size_t> chosen;
    for (std::size_t c = 0; c < cells; ++c) {
      if (mask & (1u << c)) chosen.push_back(c);
    }
    std::vector<std::vector<double>> sys(rank, std::vector<double>(rank));
    for (std::size_t r = 0; r < rank; ++r) {
      for (std::size_t k = 0; k < rank; ++k) sys[r][k] = constraint[r][chosen[k]];
    }
    std::vector<double> x;
    if (!solve_square(sys, rhs, x)) continue;
    if (*std::min_element(x.begin(), x.end()) < -1e-12) continue;
    std::vector<double> full(cells, 0.0);
    for (std::size_t k = 0; k < rank; ++k) full[chosen[k]] = x[k];
    best = std::min(best, clamped_entropy(full));
  }

  // Grid over the (a-1)(b-1) free cells; the last row and column are implied.
  const std::size_t fa = a - 1;
  const std::size_t fb = b - 1;
  const std::size_t nfree = fa * fb;
  std::vector<int> steps(nfree, 0);
  std::vector<int> limit(nfree);
  for (std::size_t i = 0; i < fa; ++i) {
    for (std::size_t j = 0; j < fb; ++j) {
      limit[i * fb + j] = static_cast<int>(std::floor(std::min(p[i], q[j]) / grid + 1e-9));
    }
  }
  for (;;) {
    std::vector<double> full(cells, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < fa; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < fb; ++j) {
        full[i * b + j] = steps[i * fb + j] * grid;
        row += full[i * b + j];
      }
      full[i * b + fb] = p[i] - row;
      if (full[i * b + fb] < -1e-12) feasible = false;
    }
    for (std::size_t j = 0; j < b && feasible; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < fa; ++i) col += full[i * b + j];
      full[fa * b + j] = q[j] - col;
      if (full[fa * b + j] < -1e-12) feasible = false;
    }
    if (feasible) best = std::min(best, clamped_entropy(full));

    std::size_t k = 0;
    while (k < nfree && steps[k] == limit[k]) steps[k++] = 0;
    if (k == nfree) break;
    ++steps[k];
  }
  return best;
}

double mec(const Dataset& data, int target, std::span<const int> given, double smoothing) {
  auto entries = empirical_conditionals(data, target, given, smoothing);
  std::vector<Categorical> conditionals;
  conditionals.reserve(entries.size());
  for (auto& e : entries) conditionals.push_back(std::move(e.conditional));
  return greedy_coupling_entropy(conditionals);
}

}  // namespace entropic
