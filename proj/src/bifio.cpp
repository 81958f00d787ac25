#include "entropic/bifio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "entropic/errors.hpp"

namespace entropic {

namespace {

struct Token {
  enum class Kind { kWord, kPunct, kEnd };
  Kind kind;
  std::string text;
  int line;
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == '+';
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '%' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') ++i;
    } else if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const int start = line;
      i += 2;
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) {
        if (src[i] == '\n') ++line;
        ++i;
      }
      if (i + 1 >= src.size()) throw ParseError(start, "unterminated comment");
      i += 2;
    } else if (c == '"') {
      const int start = line;
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"') {
        if (src[j] == '\n') ++line;
        ++j;
      }
      if (j >= src.size()) throw ParseError(start, "unterminated string");
      out.push_back({Token::Kind::kWord, std::string(src.substr(i + 1, j - i - 1)), start});
      i = j + 1;
    } else if (std::string_view("{}()[];,|=").find(c) != std::string_view::npos) {
      out.push_back({Token::Kind::kPunct, std::string(1, c), line});
      ++i;
    } else if (word_char(c)) {
      std::size_t j = i;
      while (j < src.size() && word_char(src[j])) ++j;
      out.push_back({Token::Kind::kWord, std::string(src.substr(i, j - i)), line});
      i = j;
    } else {
      throw ParseError(line, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::Kind::kEnd, "", line});
  return out;
}

struct RawRow {
  std::vector<std::string> states;  // empty for table/default
  std::vector<double> probs;
  int line;
};

struct RawCpt {
  std::string child;
  std::vector<std::string> parents;
  std::optional<RawRow> table;
  std::optional<RawRow> fallback;
  std::vector<RawRow> rows;
  int line;
};

struct RawVariable {
  std::string name;
  std::vector<std::string> states;
  int line;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  void parse_file() {
    while (peek().kind != Token::Kind::kEnd) {
      const Token& t = peek();
      if (t.kind != Token::Kind::kWord) throw ParseError(t.line, "expected a block keyword, found '" + t.text + "'");
      if (t.text == "network") {
        parse_network();
      } else if (t.text == "variable") {
        parse_variable();
      } else if (t.text == "probability") {
        parse_probability();
      } else {
        throw ParseError(t.line, "unknown block '" + t.text + "'");
      }
    }
  }

  std::string network_name;
  std::vector<RawVariable> variables;
  std::vector<RawCpt> cpts;

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (t.kind != Token::Kind::kEnd) ++pos_;
    return t;
  }
  bool at(std::string_view punct) const {
    return peek().kind == Token::Kind::kPunct && peek().text == punct;
  }
  const Token& expect_punct(std::string_view punct) {
    const Token& t = next();
    if (t.kind != Token::Kind::kPunct || t.text != punct) {
      throw ParseError(t.line, "expected '" + std::string(punct) + "', found " + describe(t));
    }
    return t;
  }
  const Token& expect_word(std::string_view what) {
    const Token& t = next();
    if (t.kind != Token::Kind::kWord) throw ParseError(t.line, "expected " + std::string(what) + ", found " + describe(t));
    return t;
  }
  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::kEnd ? std::string("end of input") : "'" + t.text + "'";
  }

  void skip_property() {
    const int line = next().line;
    while (!at(";")) {
      if (peek().kind == Token::Kind::kEnd) throw ParseError(line, "property not terminated by ';'");
      next();
    }
    next();
  }

  double number() {
    const Token& t = expect_word("a probability");
    char* end = nullptr;
    const double v = std::strtod(t.text.c_str(), &end);
    if (end != t.text.c_str() + t.text.size() || !std::isfinite(v)) {
      throw ParseError(t.line, "'" + t.text + "' is not a number");
    }
    if (v < 0.0) throw ParseError(t.line, "negative probability " + t.text);
    return v;
  }

  std::vector<double> numbers_until_semicolon() {
    std::vector<double> out{number()};
    while (at(",")) {
      next();
      out.push_back(number());
    }
    expect_punct(";");
    return out;
  }

  void parse_network() {
    next();
    if (peek().kind == Token::Kind::kWord) network_name = next().text;
    expect_punct("{");
    while (!at("}")) {
      if (peek().kind == Token::Kind::kEnd) throw ParseError(peek().line, "missing '}' closing the network block");
      if (peek().kind == Token::Kind::kWord && peek().text == "property") {
        skip_property();
      } else {
        throw ParseError(peek().line, "unexpected " + describe(peek()) + " in network block");
      }
    }
    next();
  }

  void parse_variable() {
    next();
    RawVariable var;
    const Token& name = expect_word("a variable name");
    var.name = name.text;
    var.line = name.line;
    expect_punct("{");
    bool typed = false;
    while (!at("}")) {
      const Token& t = peek();
      if (t.kind == Token::Kind::kEnd) throw ParseError(t.line, "missing '}' closing variable '" + var.name + "'");
      if (t.kind == Token::Kind::kWord && t.text == "property") {
        skip_property();
      } else if (t.kind == Token::Kind::kWord && t.text == "type") {
        next();
        const Token& kind = expect_word("'discrete'");
        if (kind.text != "discrete") throw ParseError(kind.line, "only discrete variables are supported");
        expect_punct("[");
        const Token& k = expect_word("a state count");
        if (k.text.find_first_not_of("0123456789") != std::string::npos || k.text.empty()) {
          throw ParseError(k.line, "'" + k.text + "' is not a state count");
        }
        const int count = std::atoi(k.text.c_str());
        expect_punct("]");
        expect_punct("{");
        var.states.push_back(expect_word("a state name").text);
        while (at(",")) {
          next();
          var.states.push_back(expect_word("a state name").text);
        }
        const Token& close = expect_punct("}");
        expect_punct(";");
        if (static_cast<int>(var.states.size()) != count) {
          throw ParseError(close.line, "variable '" + var.name + "' declares " + std::to_string(count) +
                                           " states but lists " + std::to_string(var.states.size()));
        }
        typed = true;
      } else {
        throw ParseError(t.line, "unexpected " + describe(t) + " in variable '" + var.name + "'");
      }
    }
    const Token& close = next();
    if (!typed) throw ParseError(close.line, "variable '" + var.name + "' has no type declaration");
    variables.push_back(std::move(var));
  }

  void parse_probability() {
    RawCpt cpt;
    cpt.line = next().line;
    expect_punct("(");
    cpt.child = expect_word("a variable name").text;
    if (at("|")) {
      next();
      cpt.parents.push_back(expect_word("a parent name").text);
      while (at(",")) {
        next();
        cpt.parents.push_back(expect_word("a parent name").text);
      }
    }
    expect_punct(")");
    expect_punct("{");
    while (!at("}")) {
      const Token& t = peek();
      if (t.kind == Token::Kind::kEnd) throw ParseError(t.line, "missing '}' closing probability of '" + cpt.child + "'");
      if (t.kind == Token::Kind::kWord && t.text == "property") {
        skip_property();
      } else if (t.kind == Token::Kind::kWord && (t.text == "table" || t.text == "default")) {
        const bool is_table = t.text == "table";
        RawRow row;
        row.line = next().line;
        row.probs = numbers_until_semicolon();
        (is_table ? cpt.table : cpt.fallback) = std::move(row);
      } else if (at("(")) {
        RawRow row;
        row.line = next().line;
        row.states.push_back(expect_word("a parent state").text);
        while (at(",")) {
          next();
          row.states.push_back(expect_word("a parent state").text);
        }
        expect_punct(")");
        row.probs = numbers_until_semicolon();
        cpt.rows.push_back(std::move(row));
      } else {
        throw ParseError(t.line, "unexpected " + describe(t) + " in probability of '" + cpt.child + "'");
      }
    }
    next();
    cpts.push_back(std::move(cpt));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

Categorical validate_row(const RawRow& row, const std::string& var, std::size_t card, std::vector<std::string>& warnings) {
  if (row.probs.size() != card) {
    throw ParseError(row.line, "row of '" + var + "' has " + std::to_string(row.probs.size()) +
                                   " probabilities, expected " + std::to_string(card));
  }
  double sum = 0.0;
  for (double p : row.probs) sum += p;
  if (std::abs(sum - 1.0) > kBifRowTolerance) {
    std::ostringstream msg;
    msg << "row of '" << var << "' sums to " << sum;
    throw ParseError(row.line, msg.str());
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    warnings.push_back("line " + std::to_string(row.line) + ": row of '" + var + "' renormalized");
  }
  return Categorical::from_weights(row.probs);
}

}  // namespace

std::size_t BayesNet::config_index(int v, const std::vector<int>& values) const {
  std::size_t c = 0;
  for (int p : parents[v]) c = c * static_cast<std::size_t>(card(p)) + values[p];
  return c;
}

BayesNet parse_bif(std::string_view text) {
  Parser parser(text);
  parser.parse_file();

  BayesNet net;
  net.name = parser.network_name;
  std::map<std::string, int> index;
  std::vector<int> decl_line;
  for (auto& v : parser.variables) {
    if (!index.emplace(v.name, static_cast<int>(net.variables.size())).second) {
      throw ParseError(v.line, "duplicate variable '" + v.name + "'");
    }
    std::vector<std::string> sorted = v.states;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ParseError(v.line, "variable '" + v.name + "' repeats a state name");
    }
    net.variables.push_back({v.name, v.states});
    decl_line.push_back(v.line);
  }
  const int n = static_cast<int>(net.variables.size());
  net.parents.assign(n, {});
  net.cpts.assign(n, {});
  std::vector<int> cpt_line(n, 0);

  auto lookup = [&](const std::string& name, int line) {
    auto it = index.find(name);
    if (it == index.end()) throw ParseError(line, "unknown variable '" + name + "'");
    return it->second;
  };

  for (const auto& raw : parser.cpts) {
    const int child = lookup(raw.child, raw.line);
    if (cpt_line[child]) throw ParseError(raw.line, "second probability block for '" + raw.child + "'");
    cpt_line[child] = raw.line;
    std::vector<int> parents;
    for (const auto& p : raw.parents) {
      const int pi = lookup(p, raw.line);
      if (pi == child) throw ParseError(raw.line, "'" + raw.child + "' lists itself as a parent");
      if (std::find(parents.begin(), parents.end(), pi) != parents.end()) {
        throw ParseError(raw.line, "parent '" + p + "' listed twice for '" + raw.child + "'");
      }
      parents.push_back(pi);
    }
    net.parents[child] = parents;

    const std::size_t card = net.variables[child].states.size();
    std::size_t configs = 1;
    for (int p : parents) configs *= static_cast<std::size_t>(net.card(p));
    std::vector<std::optional<Categorical>> rows(configs);

    if (raw.table) {
      if (!parents.empty()) {
        throw ParseError(raw.table->line, "'table' is only supported for variables without parents");
      }
      rows[0] = validate_row(*raw.table, raw.child, card, net.warnings);
    }
    for (const auto& row : raw.rows) {
      if (row.states.size() != parents.size()) {
        throw ParseError(row.line, "row of '" + raw.child + "' names " + std::to_string(row.states.size()) +
                                       " parent states, expected " + std::to_string(parents.size()));
      }
      std::size_t cfg = 0;
      for (std::size_t k = 0; k < parents.size(); ++k) {
        const auto& states = net.variables[parents[k]].states;
        auto it = std::find(states.begin(), states.end(), row.states[k]);
        if (it == states.end()) {
          throw ParseError(row.line, "'" + row.states[k] + "' is not a state of '" + net.variables[parents[k]].name + "'");
        }
        cfg = cfg * states.size() + static_cast<std::size_t>(it - states.begin());
      }
      if (rows[cfg]) throw ParseError(row.line, "duplicate row for '" + raw.child + "'");
      rows[cfg] = validate_row(row, raw.child, card, net.warnings);
    }
    std::optional<Categorical> fallback;
    if (raw.fallback) fallback = validate_row(*raw.fallback, raw.child, card, net.warnings);
    for (auto& r : rows) {
      if (!r) {
        if (!fallback) throw ParseError(raw.line, "probability of '" + raw.child + "' is missing rows");
        r = fallback;
      }
      net.cpts[child].push_back(*r);
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!cpt_line[v]) throw ParseError(decl_line[v], "variable '" + net.variables[v].name + "' has no probability block");
  }

  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v) {
    for (int p : net.parents[v]) edges.emplace_back(p, v);
  }
  try {
    (void)Dag(n, edges);
  } catch (const InvalidParameter&) {
    // Report the first probability block that lies on a cycle.
    std::vector<std::vector<int>> children(n);
    for (auto [p, c] : edges) children[p].push_back(c);
    int line = 0;
    for (int v = 0; v < n && !line; ++v) {
      std::vector<bool> seen(n, false);
      std::vector<int> stack(children[v].begin(), children[v].end());
      while (!stack.empty() && !line) {
        int u = stack.back();
        stack.pop_back();
        if (u == v) line = cpt_line[v];
        if (seen[u]) continue;
        seen[u] = true;
        for (int c : children[u]) stack.push_back(c);
      }
      if (line) throw ParseError(line, "parent structure is cyclic through '" + net.variables[v].name + "'");
    }
    throw ParseError(1, "parent structure is cyclic");
  }
  return net;
}

BayesNet read_bif(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_bif(ss.str());
}

Dag bn_truth(const BayesNet& net) {
  std::vector<std::string> names;
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < net.num_vars(); ++v) {
    names.push_back(net.variables[v].name);
    for (int p : net.parents[v]) edges.emplace_back(p, static_cast<int>(v));
  }
  return Dag(std::move(names), std::move(edges));
}

Dataset bn_sample(const BayesNet& net, std::size_t n_samples, Rng& rng) {
  if (n_samples < 1) throw InvalidParameter("sample count must be >= 1");
  const Dag g = bn_truth(net);
  const auto order = topological_order(g);
  const std::size_t n = net.num_vars();
  std::vector<std::vector<std::vector<double>>> cdf(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& row : net.cpts[v]) {
      std::vector<double> c;
      double acc = 0.0;
      for (double p : row.probs()) c.push_back(acc += p);
      cdf[v].push_back(std::move(c));
    }
  }
  std::vector<std::vector<int>> columns(n, std::vector<int>(n_samples));
  std::vector<int> values(n, 0);
  for (std::size_t r = 0; r < n_samples; ++r) {
    for (int v : order) {
      const auto& c = cdf[v][net.config_index(v, values)];
      const double u = rng.uniform() * c.back();
      auto it = std::upper_bound(c.begin(), c.end(), u);
      values[v] = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(it - c.begin()), c.size() - 1));
      columns[v][r] = values[v];
    }
  }
  std::vector<int> cards;
  for (std::size_t v = 0; v < n; ++v) cards.push_back(net.card(static_cast<int>(v)));
  return Dataset(g.names(), std::move(cards), std::move(columns));
}

std::string state_names_json(const BayesNet& net) {
  nlohmann::ordered_json j;
  for (const auto& v : net.variables) j[v.name] = v.states;
  return j.dump() + "\n";
}

}  // namespace entropic
