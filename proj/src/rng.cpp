#include "entropic/rng.hpp"

#include <cmath>
#include <limits>

namespace entropic {

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Marsaglia polar method; the spare value is discarded to keep the
  // stream position independent of call history.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::log_gamma_draw(double shape) {
  // Marsaglia-Tsang; for shape < 1 use G(a) = G(a+1) * U^(1/a).
  double boost = 0.0;
  if (shape < 1.0) {
    boost = std::log(uniform_pos()) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x ||
        std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return std::log(d * v) + boost;
    }
  }
}

std::size_t Rng::categorical(const std::vector<double>& probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  double u = uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last = i;
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  return last;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view cell_id, std::uint64_t replicate) {
  return splitmix64(splitmix64(master) ^ stable_hash(cell_id) ^ splitmix64(replicate * 0x2545f4914f6cdd1dULL + 1));
}

}  // namespace entropic
