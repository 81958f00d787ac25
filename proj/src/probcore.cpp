#include "entropic/probcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "entropic/errors.hpp"

namespace entropic {

Categorical::Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidParameter("categorical needs at least one state");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidParameter("categorical mass must be finite and >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidParameter("categorical masses sum to " + std::to_string(sum) + ", not 1");
  }
}

Categorical Categorical::from_weights(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidParameter("weights must be finite and >= 0");
    sum += w;
  }
  if (!(sum > 0.0)) throw InvalidParameter("weights must have a positive sum");
  for (double& w : weights) w /= sum;
  return Categorical(std::move(weights));
}

Categorical Categorical::point_mass(std::size_t k, std::size_t state) {
  std::vector<double> p(k, 0.0);
  p.at(state) = 1.0;
  return Categorical(std::move(p));
}

Categorical Categorical::uniform(std::size_t k) {
  if (k == 0) throw InvalidParameter("categorical needs at least one state");
  return Categorical(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

std::size_t Categorical::support_size() const {
  return static_cast<std::size_t>(std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }));
}

double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return std::max(h, 0.0);
}

Categorical dirichlet_sample(std::size_t k, double alpha, Rng& rng) {
  if (k == 0) throw InvalidParameter("dirichlet needs k >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidParameter("dirichlet alpha must be > 0");
  if (k == 1) return Categorical({1.0});
  std::vector<double> logs(k);
  for (auto& l : logs) l = rng.log_gamma_draw(alpha);
  const double mx = *std::max_element(logs.begin(), logs.end());
  std::vector<double> w(k);
  for (std::size_t i = 0; i < k; ++i) w[i] = std::exp(logs[i] - mx);
  return Categorical::from_weights(std::move(w));
}

namespace {

double mean_entropy(std::size_t k, double alpha, int draws, Rng& rng) {
  double total = 0.0;
  for (int d = 0; d < draws; ++d) total += entropy(dirichlet_sample(k, alpha, rng));
  return total / draws;
}

}  // namespace

Categorical entropy_targeted_dirichlet(std::size_t k, double target_bits, double tol, Rng& rng,
                                       const TargetedDirichletOptions& opts) {
  if (k == 0) throw InvalidParameter("entropy target needs k >= 1");
  if (!(tol > 0.0)) throw InvalidParameter("entropy tolerance must be > 0");
  if (target_bits < 0.0) throw InvalidParameter("entropy target must be >= 0");
  if (k == 1) {
    if (target_bits <= tol) return Categorical({1.0});
    throw TargetUnreachable("a single state has zero entropy");
  }
  const double h_max = std::log2(static_cast<double>(k));
  if (target_bits > h_max - tol) {
    throw TargetUnreachable("entropy target " + std::to_string(target_bits) + " bits is not reachable with " +
                            std::to_string(k) + " states (max " + std::to_string(h_max) + ", tol " +
                            std::to_string(tol) + ")");
  }

  // Mean entropy is increasing in alpha; bisect in log space.
  double lo = std::log(opts.alpha_lo);
  double hi = std::log(opts.alpha_hi);
  for (int step = 0; step < opts.bisection_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mean_entropy(k, std::exp(mid), opts.mc_draws, rng) < target_bits) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double alpha = std::exp(0.5 * (lo + hi));

  std::vector<double> best;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_h = 0.0;
  for (int draw = 0; draw < opts.rejection_cap; ++draw) {
    Categorical p = dirichlet_sample(k, alpha, rng);
    const double h = entropy(p);
    const double gap = std::abs(h - target_bits);
    if (gap <= tol) return p;
    if (gap < best_gap) {
      best_gap = gap;
      best_h = h;
      best = p.probs();
    }
  }
  throw ConvergenceFailure("no Dirichlet draw within " + std::to_string(tol) + " bits of " +
                               std::to_string(target_bits) + " after " + std::to_string(opts.rejection_cap) +
                               " draws",
                           std::move(best), best_h);
}

Dataset::Dataset(std::vector<std::string> names, std::vector<int> cards, std::vector<std::vector<int>> columns,
                 std::vector<double> weights)
    : names_(std::move(names)), cards_(std::move(cards)), columns_(std::move(columns)), weights_(std::move(weights)) {
  if (names_.size() != cards_.size() || names_.size() != columns_.size()) {
    throw InvalidParameter("dataset names, cards and columns differ in length");
  }
  const std::size_t rows = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t v = 0; v < columns_.size(); ++v) {
    if (cards_[v] < 1) throw InvalidParameter("cardinality of '" + names_[v] + "' must be >= 1");
    if (columns_[v].size() != rows) throw InvalidParameter("dataset columns differ in length");
    for (int x : columns_[v]) {
      if (x < 0 || x >= cards_[v]) {
        throw InvalidParameter("value " + std::to_string(x) + " out of range for '" + names_[v] + "'");
      }
    }
  }
  if (!weights_.empty()) {
    if (weights_.size() != rows) throw InvalidParameter("weights length differs from row count");
    for (double w : weights_) {
      if (!(w >= 0.0)) throw InvalidParameter("row weights must be >= 0");
    }
  }
}

double Dataset::total_weight() const {
  if (weights_.empty()) return static_cast<double>(num_rows());
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

int Dataset::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

RowGroups group_rows(const Dataset& data, std::span<const int> vars) {
  const std::size_t rows = data.num_rows();
  RowGroups out;
  std::vector<std::uint64_t> code(rows, 0);
  std::uint64_t range = 1;

  // Re-number codes densely whenever the mixed-radix range would overflow.
  auto densify = [&]() {
    std::unordered_map<std::uint64_t, std::uint64_t> ids;
    for (auto& c : code) {
      auto [it, fresh] = ids.try_emplace(c, ids.size());
      c = it->second;
    }
    range = std::max<std::uint64_t>(ids.size(), 1);
  };

  for (int v : vars) {
    const auto card = static_cast<std::uint64_t>(data.card(v));
    if (range > std::numeric_limits<std::uint64_t>::max() / card) densify();
    const auto& col = data.column(v);
    for (std::size_t r = 0; r < rows; ++r) code[r] = code[r] * card + static_cast<std::uint64_t>(col[r]);
    range *= card;
  }

  std::unordered_map<std::uint64_t, int> first_id;
  std::vector<std::size_t> first_row;
  out.group_of_row.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto [it, fresh] = first_id.try_emplace(code[r], static_cast<int>(first_row.size()));
    if (fresh) first_row.push_back(r);
    out.group_of_row[r] = it->second;
  }

  std::vector<std::vector<int>> configs(first_row.size());
  for (std::size_t g = 0; g < first_row.size(); ++g) {
    configs[g].reserve(vars.size());
    for (int v : vars) configs[g].push_back(data.at(first_row[g], v));
  }
  std::vector<int> order(configs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return configs[a] < configs[b]; });
  std::vector<int> rank(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  for (auto& g : out.group_of_row) g = rank[g];
  out.configs.resize(configs.size());
  for (std::size_t i = 0; i < order.size(); ++i) out.configs[i] = std::move(configs[order[i]]);
  return out;
}

namespace {

void check_vars(const Dataset& data, int target, std::span<const int> given) {
  const int n = static_cast<int>(data.num_vars());
  if (target < 0 || target >= n) throw InvalidParameter("target variable index out of range");
  for (int g : given) {
    if (g < 0 || g >= n) throw InvalidParameter("conditioning variable index out of range");
    if (g == target) throw InvalidParameter("target variable appears in the conditioning set");
  }
}

}  // namespace

std::vector<ConditionalEntry> empirical_conditionals(const Dataset& data, int target, std::span<const int> given,
                                                     double smoothing) {
  check_vars(data, target, given);
  if (smoothing < 0.0) throw InvalidParameter("smoothing must be >= 0");
  if (data.num_rows() == 0 || !(data.total_weight() > 0.0)) throw InsufficientData("dataset has no rows");

  const RowGroups groups = group_rows(data, given);
  const int card = data.card(target);
  std::vector<std::vector<double>> counts(groups.num_groups(), std::vector<double>(card, 0.0));
  std::vector<double> group_weight(groups.num_groups(), 0.0);
  const auto& col = data.column(target);
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    const double w = data.weight(r);
    counts[groups.group_of_row[r]][col[r]] += w;
    group_weight[groups.group_of_row[r]] += w;
  }

  const double total = data.total_weight();
  std::vector<ConditionalEntry> out;
  out.reserve(groups.num_groups());
  for (std::size_t g = 0; g < groups.num_groups(); ++g) {
    if (!(group_weight[g] > 0.0)) continue;
    auto& c = counts[g];
    if (smoothing > 0.0) {
      for (auto& x : c) x += smoothing;
    }
    out.push_back({groups.configs[g], group_weight[g] / total, Categorical::from_weights(std::move(c))});
  }
  return out;
}

Categorical empirical_marginal(const Dataset& data, int var) {
  auto entries = empirical_conditionals(data, var, {}, 0.0);
  return entries.front().conditional;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty CSV");
  // Strip a UTF-8 byte-order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line = line.substr(3);
  std::vector<std::string> names = split_csv_line(line);
  for (const auto& n : names) {
    if (n.empty()) throw ParseError(1, "empty column name");
    if (std::count(names.begin(), names.end(), n) > 1) throw ParseError(1, "duplicate column '" + n + "'");
  }
  std::vector<std::vector<int>> columns(names.size());
  std::vector<int> cards(names.size(), 1);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != names.size()) {
      throw ParseError(lineno, "expected " + std::to_string(names.size()) + " fields, found " +
                                   std::to_string(cells.size()));
    }
    for (std::size_t v = 0; v < cells.size(); ++v) {
      const auto& s = cells[v];
      if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 9) {
        throw ParseError(lineno, "'" + s + "' is not a non-negative integer");
      }
      const int x = std::stoi(s);
      columns[v].push_back(x);
      cards[v] = std::max(cards[v], x + 1);
    }
  }
  return Dataset(std::move(names), std::move(cards), std::move(columns));
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset_csv(ss.str());
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t v = 0; v < data.num_vars(); ++v) {
    if (v) out += ',';
    out += data.names()[v];
  }
  out += '\n';
  for (std::size_t r = 0; r < data.num_rows(); ++r) {
    for (std::size_t v = 0; v < data.num_vars(); ++v) {
      if (v) out += ',';
      out += std::to_string(data.at(r, v));
    }
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write '" + path + "'");
  out << dataset_to_csv(data);
}

std::string dataset_schema_json(const Dataset& data) {
  nlohmann::json j;
  j["columns"] = data.names();
  j["cards"] = data.cards();
  return j.dump(2) + "\n";
}

Dataset apply_schema(const Dataset& data, const std::string& schema_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(schema_json);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("bad schema JSON: ") + e.what());
  }
  if (!j.contains("columns") || !j.contains("cards")) throw InvalidParameter("schema needs 'columns' and 'cards'");
  auto names = j["columns"].get<std::vector<std::string>>();
  auto cards = j["cards"].get<std::vector<int>>();
  if (names.size() != cards.size()) throw InvalidParameter("schema columns and cards differ in length");
  std::vector<int> new_cards = data.cards();
  for (std::size_t i = 0; i < names.size(); ++i) {
    const int v = data.index_of(names[i]);
    if (v < 0) throw InvalidParameter("schema column '" + names[i] + "' not in dataset");
    if (cards[i] < data.card(v)) {
      throw InvalidParameter("schema cardinality for '" + names[i] + "' is below observed values");
    }
    new_cards[v] = cards[i];
  }
  std::vector<std::vector<int>> cols;
  for (std::size_t v = 0; v < data.num_vars(); ++v) cols.push_back(data.column(v));
  return Dataset(data.names(), std::move(new_cards), std::move(cols), data.weights());
}

}  // namespace entropic
