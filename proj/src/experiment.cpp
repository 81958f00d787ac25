#include "entropic/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <tuple>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "entropic/errors.hpp"
#include "entropic/scm.hpp"

namespace entropic {

std::string MethodSpec::label() const {
  if (algorithm == "anm") return "anm";
  return algorithm + ":" + to_string(measure);
}

MethodSpec MethodSpec::parse(const std::string& s) {
  const auto colon = s.find(':');
  MethodSpec m;
  m.algorithm = s.substr(0, colon);
  if (m.algorithm != "peel" && m.algorithm != "enumerate" && m.algorithm != "anm") {
    throw InvalidParameter("unknown method '" + s + "' (expected peel, enumerate or anm)");
  }
  if (colon != std::string::npos) {
    if (m.algorithm == "anm") throw InvalidParameter("the anm method takes no measure");
    m.measure = parse_measure(s.substr(colon + 1));
  }
  return m;
}

void ExperimentConfig::validate() const {
  if (version != 1) throw InvalidParameter("unsupported config version " + std::to_string(version));
  if (replicates < 1) throw InvalidParameter("replicates must be >= 1");
  if (noise.empty()) throw InvalidParameter("noise sweep must not be empty");
  if (samples.empty()) throw InvalidParameter("sample-size sweep must not be empty");
  if (methods.empty()) throw InvalidParameter("at least one method is required");
  if (model != "unconstrained" && model != "anm") throw InvalidParameter("model must be 'unconstrained' or 'anm'");
  if (ci != "gtest" && ci != "dsep") throw InvalidParameter("ci must be 'gtest' or 'dsep'");
  if (n_states < 1 || m_states < 1) throw InvalidParameter("state counts must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must be in (0, 1)");
  if (!(noise_tol > 0.0)) throw InvalidParameter("noise_tol must be > 0");
  if (model == "anm") {
    for (double k : noise) {
      if (k < 0 || k != std::floor(k)) throw InvalidParameter("anm noise values are integer half-widths");
    }
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ExperimentConfig c;
  try {
    auto j = nlohmann::json::parse(json_text);
    c.version = j.value("version", 0);
    c.id = j.value("id", c.id);
    c.graph = j.value("graph", c.graph);
    c.model = j.value("model", c.model);
    c.n_states = j.value("n_states", c.n_states);
    c.m_states = j.value("m_states", c.m_states);
    if (j.contains("noise")) c.noise = j["noise"].get<std::vector<double>>();
    c.noise_tol = j.value("noise_tol", c.noise_tol);
    if (j.contains("samples")) c.samples = j["samples"].get<std::vector<std::size_t>>();
    if (j.contains("methods")) {
      c.methods.clear();
      for (const auto& m : j["methods"]) c.methods.push_back(MethodSpec::parse(m.get<std::string>()));
    }
    c.replicates = j.value("replicates", c.replicates);
    c.seed = j.value("seed", c.seed);
    c.alpha = j.value("alpha", c.alpha);
    c.smoothing = j.value("smoothing", c.smoothing);
    c.ci = j.value("ci", c.ci);
    c.high_entropy_sources = j.value("high_entropy_sources", c.high_entropy_sources);
    c.edge_prob = j.value("edge_prob", c.edge_prob);
    c.timing = j.value("timing", c.timing);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParameter(std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

namespace {

bool parse_suffix(const std::string& spec, const std::string& prefix, std::size_t& k) {
  if (spec.rfind(prefix, 0) != 0) return false;
  const std::string rest = spec.substr(prefix.size());
  if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos) return false;
  k = static_cast<std::size_t>(std::stoul(rest));
  return true;
}

std::string format_noise(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

}  // namespace

Dag graph_from_spec(const std::string& spec, double edge_prob, Rng& rng) {
  std::size_t k = 0;
  if (spec == "line") return line_graph(3);
  if (spec == "triangle") return triangle_graph();
  if (spec == "diamond") return diamond_graph();
  if (spec == "hall") return hall_graph();
  if (spec == "g1") return counterexample_g1();
  if (spec == "g2") return counterexample_g2();
  if (spec == "g3") return counterexample_g3();
  if (parse_suffix(spec, "line-", k)) return line_graph(k);
  if (parse_suffix(spec, "complete-", k)) return complete_graph(k);
  if (parse_suffix(spec, "random-", k)) return random_dag(k, edge_prob, rng);
  std::ifstream in(spec);
  if (!in) throw InvalidParameter("unknown graph '" + spec + "' (not a fixture name or readable JSON file)");
  std::ostringstream ss;
  ss << in.rdbuf();
  return dag_from_json(ss.str());
}

namespace {

struct Task {
  std::size_t cell;
  double noise;
  std::size_t samples;
  std::string cell_id;
  int replicate;
};

std::vector<ResultRecord> run_task(const ExperimentConfig& c, const Task& t) {
  const std::uint64_t seed = derive_seed(c.seed, t.cell_id, static_cast<std::uint64_t>(t.replicate));
  std::vector<ResultRecord> out;
  for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
    ResultRecord r;
    r.experiment = c.id;
    r.graph = c.graph;
    r.method = c.methods[mi].algorithm;
    r.measure = c.methods[mi].algorithm == "anm" ? "" : to_string(c.methods[mi].measure);
    r.n_states = c.n_states;
    r.samples = t.samples;
    r.noise = t.noise;
    r.replicate = t.replicate;
    r.seed = seed;
    r.cell = t.cell;
    r.method_index = mi;
    out.push_back(std::move(r));
  }

  Rng rng(seed);
  std::optional<Dag> truth;
  std::optional<Dataset> data;
  try {
    truth = graph_from_spec(c.graph, c.edge_prob, rng);
    const Scm scm = c.model == "anm"
                        ? anm_scm(*truth, c.n_states, static_cast<int>(t.noise), rng)
                        : random_scm(*truth, c.n_states, c.m_states, NoiseSpec::targeted(t.noise, c.noise_tol),
                                     c.high_entropy_sources, rng);
    data = t.samples == 0 ? exact_joint(scm).to_dataset() : sample(scm, t.samples, rng);
  } catch (const std::exception& e) {
    for (auto& r : out) r.error = e.what();
    return out;
  }

  const Skeleton skeleton(*truth);
  for (std::size_t mi = 0; mi < c.methods.size(); ++mi) {
    auto& rec = out[mi];
    const auto& method = c.methods[mi];
    DiscoveryConfig dc;
    dc.measure = method.measure;
    dc.alpha = c.alpha;
    dc.smoothing = c.smoothing;
    dc.ci = c.ci == "dsep" ? DiscoveryConfig::Ci::kDSeparation : DiscoveryConfig::Ci::kGTest;
    dc.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    try {
      Dag found;
      if (method.algorithm == "peel") {
        found = peel(*data, skeleton, dc, &*truth).dag;
      } else if (method.algorithm == "enumerate") {
        found = enumerate_discover(*data, skeleton, dc).best;
      } else {
        found = anm_baseline(*data, skeleton, c.alpha).dag;
      }
      rec.shd = shd(found, *truth);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    if (c.timing) {
      rec.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                           .count();
    }
  }
  return out;
}

}  // namespace

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, int jobs) {
  config.validate();
  std::vector<Task> tasks;
  std::size_t cell = 0;
  for (double noise : config.noise) {
    for (std::size_t samples : config.samples) {
      std::string id = config.id + "|" + config.graph + "|" + config.model + "|n=" + std::to_string(config.n_states) +
                       "|m=" + std::to_string(config.m_states) + "|noise=" + format_noise(noise) +
                       "|samples=" + std::to_string(samples);
      for (int r = 0; r < config.replicates; ++r) tasks.push_back({cell, noise, samples, id, r});
      ++cell;
    }
  }

  std::vector<std::vector<ResultRecord>> per_task(tasks.size());
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) per_task[i] = run_task(config, tasks[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) per_task[i] = run_task(config, tasks[i]);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<ResultRecord> records;
  for (auto& v : per_task) {
    for (auto& r : v) records.push_back(std::move(r));
  }
  std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
    return std::tie(a.cell, a.method_index, a.replicate) < std::tie(b.cell, b.method_index, b.replicate);
  });
  return records;
}

std::string results_csv_header() {
  return "experiment,graph,method,measure,n_states,samples,noise,replicate,seed,shd,runtime_ms,error";
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string results_to_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream out;
  out << results_csv_header() << '\n';
  for (const auto& r : records) {
    out << csv_field(r.experiment) << ',' << csv_field(r.graph) << ',' << r.method << ',' << r.measure << ','
        << r.n_states << ',' << r.samples << ',' << format_noise(r.noise) << ',' << r.replicate << ',' << r.seed
        << ',';
    if (r.shd >= 0) out << r.shd;
    out << ',' << r.runtime_ms << ',' << csv_field(r.error) << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::vector<std::string>> read_csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cur;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(cur);
      cur.clear();
      any = true;
    } else if (ch == '\n') {
      row.push_back(cur);
      if (any || !cur.empty()) rows.push_back(row);
      row.clear();
      cur.clear();
      any = false;
    } else if (ch != '\r') {
      cur += ch;
      any = true;
    }
  }
  if (any || !cur.empty()) {
    row.push_back(cur);
    rows.push_back(row);
  }
  return rows;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

double to_number(const std::string& s, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidParameter("column '" + column + "' has non-numeric value '" + s + "'");
  }
}

}  // namespace

std::string plot_svg(const std::string& csv_text, const std::string& x, const std::string& y,
                     const std::string& group) {
  const auto rows = read_csv_rows(csv_text);
  if (rows.empty()) throw InvalidParameter("results CSV is empty");
  const auto& header = rows.front();
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidParameter("results CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cx = column(x);
  const std::size_t cy = column(y);
  const std::size_t cg = column(group);
  if (rows.size() < 2) throw InvalidParameter("results CSV has no data rows");

  // group -> x -> values
  std::map<std::string, std::map<double, std::vector<double>>> series;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) throw InvalidParameter("results CSV row " + std::to_string(r + 1) + " is ragged");
    if (row[cy].empty()) continue;  // failed replicate
    series[row[cg]][to_number(row[cx], x)].push_back(to_number(row[cy], y));
  }
  if (series.empty()) throw InvalidParameter("results CSV has no numeric '" + y + "' values");

  struct Point {
    double x, mean, se;
  };
  std::map<std::string, std::vector<Point>> points;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [g, by_x] : series) {
    for (const auto& [xv, ys] : by_x) {
      double mean = 0.0;
      for (double v : ys) mean += v;
      mean /= static_cast<double>(ys.size());
      double var = 0.0;
      for (double v : ys) var += (v - mean) * (v - mean);
      const double se = ys.size() > 1 ? std::sqrt(var / static_cast<double>(ys.size() - 1) / static_cast<double>(ys.size())) : 0.0;
      points[g].push_back({xv, mean, se});
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, mean - se);
      ymax = std::max(ymax, mean + se);
    }
  }
  ymin = std::min(ymin, 0.0);
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }

  const double width = 640, height = 420, left = 70, right = 160, top = 30, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double v) { return top + ph - (v - ymin) / (ymax - ymin) * ph; };
  static const char* kPalette[] = {"#0072b2", "#d55e00", "#009e73", "#cc79a7", "#e69f00", "#56b4e9", "#f0e442", "#000000"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(left + pw) << "\" y2=\""
      << fmt(top + ph) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left) << "\" y2=\"" << fmt(top + ph)
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    svg << "<text x=\"" << fmt(sx(xv)) << "\" y=\"" << fmt(top + ph + 18) << "\" font-size=\"11\" text-anchor=\"middle\">"
        << fmt(xv) << "</text>\n";
    svg << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(sy(yv) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
        << fmt(yv) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(height - 15)
      << "\" font-size=\"13\" text-anchor=\"middle\">" << xml_escape(x) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << fmt(top + ph / 2) << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << fmt(top + ph / 2) << ")\">" << xml_escape(y) << "</text>\n";

  std::size_t gi = 0;
  for (const auto& [g, pts] : points) {
    const char* color = kPalette[gi % 8];
    svg << "<g class=\"series\" data-group=\"" << xml_escape(g) << "\">\n";
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k) svg << ' ';
      svg << fmt(sx(pts[k].x)) << ',' << fmt(sy(pts[k].mean));
    }
    svg << "\"/>\n";
    for (const auto& p : pts) {
      svg << "<line class=\"whisker\" x1=\"" << fmt(sx(p.x)) << "\" y1=\"" << fmt(sy(p.mean - p.se)) << "\" x2=\""
          << fmt(sx(p.x)) << "\" y2=\"" << fmt(sy(p.mean + p.se)) << "\" stroke=\"" << color << "\"/>\n";
    }
    const double ly = top + 14 + 18 * static_cast<double>(gi);
    svg << "<line x1=\"" << fmt(left + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(left + pw + 32)
        << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fmt(left + pw + 38) << "\" y=\"" << fmt(ly + 4) << "\" font-size=\"11\">" << xml_escape(g)
        << "</text>\n";
    svg << "</g>\n";
    ++gi;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace entropic
