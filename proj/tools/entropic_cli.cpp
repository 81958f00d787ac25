// Command-line front end: synthetic data generation, discovery, evaluation,
// experiment grids, percentiles, BIF sampling and plotting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "entropic/bifio.hpp"
#include "entropic/discovery.hpp"
#include "entropic/errors.hpp"
#include "entropic/experiment.hpp"
#include "entropic/graphs.hpp"
#include "entropic/probcore.hpp"
#include "entropic/scm.hpp"

namespace fs = std::filesystem;
using namespace entropic;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write '" + path.string() + "'");
  out << text;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_file(out_path, text);
  }
}

Dataset load_data(const std::string& path, const std::string& schema) {
  Dataset data = read_dataset_csv(path);
  if (!schema.empty()) data = apply_schema(data, slurp(schema));
  return data;
}

struct Shared {
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::string measure = "total";
  double smoothing = 0.0;
  bool seed_given = false;

  DiscoveryConfig discovery() const {
    DiscoveryConfig c;
    c.seed = seed;
    c.alpha = alpha;
    c.measure = parse_measure(measure);
    c.smoothing = smoothing;
    c.validate();
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropic causal discovery over categorical data"};
  app.require_subcommand(1);
  app.fallthrough();
  Shared shared;
  auto* seed_opt = app.add_option("--seed", shared.seed, "Master random seed");
  app.add_option("--alpha", shared.alpha, "CI test significance level");
  app.add_option("--measure", shared.measure, "Oracle measure")
      ->check(CLI::IsMember({"exogenous", "total", "marginal"}));
  app.add_option("--smoothing", shared.smoothing, "Additive smoothing of empirical conditionals")
      ->check(CLI::NonNegativeNumber);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate an SCM and a dataset from it");
  std::string gen_graph = "triangle", gen_model = "unconstrained", gen_out = ".";
  int gen_n = 10, gen_m = 10;
  double gen_noise = 1.0, gen_tol = 0.05, gen_edge_prob = 0.5;
  std::size_t gen_samples = 10000;
  bool gen_hes = false;
  gen->add_option("--graph", gen_graph, "Graph fixture name or graph JSON path");
  gen->add_option("--model", gen_model, "unconstrained or anm")->check(CLI::IsMember({"unconstrained", "anm"}));
  gen->add_option("--n-states", gen_n, "States per observed variable")->check(CLI::PositiveNumber);
  gen->add_option("--m-states", gen_m, "States per exogenous variable")->check(CLI::PositiveNumber);
  gen->add_option("--noise", gen_noise, "Target exogenous entropy in bits, or the anm half-width");
  gen->add_option("--noise-tol", gen_tol, "Entropy tolerance in bits");
  gen->add_option("--samples", gen_samples, "Number of samples")->check(CLI::PositiveNumber);
  gen->add_flag("--hes", gen_hes, "High-entropy sources");
  gen->add_option("--edge-prob", gen_edge_prob, "Edge probability for random-k graphs");
  gen->add_option("--out-dir", gen_out, "Output directory");

  // discover
  auto* disc = app.add_subcommand("discover", "Orient a skeleton from data");
  std::string disc_data, disc_schema, disc_skeleton, disc_method = "enumerate", disc_out, disc_scores, disc_ci = "gtest",
                                                     disc_truth;
  disc->add_option("--data", disc_data, "Dataset CSV")->required();
  disc->add_option("--schema", disc_schema, "Schema JSON with column cardinalities");
  disc->add_option("--skeleton", disc_skeleton, "Skeleton (or graph) JSON")->required();
  disc->add_option("--method", disc_method, "peel, enumerate or anm")
      ->check(CLI::IsMember({"peel", "enumerate", "anm"}));
  disc->add_option("--ci", disc_ci, "CI backend for peel")->check(CLI::IsMember({"gtest", "dsep"}));
  disc->add_option("--truth", disc_truth, "True graph JSON (needed by --ci dsep)");
  disc->add_option("--scores", disc_scores, "Write the enumeration score table CSV here");
  disc->add_option("--out", disc_out, "Output graph JSON (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Structural Hamming distance between two graphs");
  std::string eval_a, eval_b;
  eval->add_option("first", eval_a, "Graph JSON")->required();
  eval->add_option("second", eval_b, "Graph JSON")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an experiment grid");
  std::string exp_config, exp_out;
  int exp_jobs = 1;
  exp->add_option("--config", exp_config, "Experiment config JSON")->required();
  exp->add_option("--out", exp_out, "Results CSV (default stdout)");
  exp->add_option("--jobs", exp_jobs, "Worker threads")->check(CLI::PositiveNumber);

  // percentile
  auto* pct = app.add_subcommand("percentile", "Rank of the true graph's total entropy");
  std::string pct_data, pct_schema, pct_truth, pct_skeleton, pct_scores;
  std::size_t pct_samples = 9999;
  std::size_t pct_cap = 1'000'000;
  pct->add_option("--data", pct_data, "Dataset CSV")->required();
  pct->add_option("--schema", pct_schema, "Schema JSON with column cardinalities");
  pct->add_option("--truth", pct_truth, "True graph JSON")->required();
  pct->add_option("--skeleton", pct_skeleton, "Skeleton JSON (default: the truth's)");
  pct->add_option("--samples", pct_samples, "Orientations sampled when enumeration exceeds the cap");
  pct->add_option("--cap", pct_cap, "Enumeration cap");
  pct->add_option("--scores", pct_scores, "Write the score table CSV here");

  // bif sample
  auto* bif = app.add_subcommand("bif", "Bayesian network files");
  bif->require_subcommand(1);
  auto* bif_sample_cmd = bif->add_subcommand("sample", "Sample a dataset from a .bif network");
  std::string bif_path, bif_out = ".";
  std::size_t bif_samples = 10000;
  bif_sample_cmd->add_option("bif", bif_path, ".bif file")->required();
  bif_sample_cmd->add_option("--samples", bif_samples, "Number of samples")->check(CLI::PositiveNumber);
  bif_sample_cmd->add_option("--out-dir", bif_out, "Output directory");

  // plot
  auto* plot = app.add_subcommand("plot", "Mean-vs-x line chart of a results CSV");
  std::string plot_results, plot_x = "noise", plot_y = "shd", plot_group = "method", plot_out;
  plot->add_option("--results", plot_results, "Results CSV")->required();
  plot->add_option("--x", plot_x, "x column");
  plot->add_option("--y", plot_y, "y column");
  plot->add_option("--group", plot_group, "Grouping column");
  plot->add_option("--out", plot_out, "Output SVG (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  shared.seed_given = seed_opt->count() > 0;

  try {
    if (*gen) {
      Rng rng(shared.seed);
      const Dag truth = graph_from_spec(gen_graph, gen_edge_prob, rng);
      if (gen_model == "anm" && (gen_noise < 0 || gen_noise != static_cast<int>(gen_noise))) {
        throw InvalidParameter("--noise must be a non-negative integer half-width for --model anm");
      }
      const Scm scm = gen_model == "anm"
                          ? anm_scm(truth, gen_n, static_cast<int>(gen_noise), rng)
                          : random_scm(truth, gen_n, gen_m, NoiseSpec::targeted(gen_noise, gen_tol), gen_hes, rng);
      const Dataset data = sample(scm, gen_samples, rng);
      const fs::path dir(gen_out);
      write_file(dir / "data.csv", dataset_to_csv(data));
      write_file(dir / "schema.json", dataset_schema_json(data));
      write_file(dir / "truth.json", dag_to_json(truth));
      write_file(dir / "skeleton.json", skeleton_to_json(Skeleton(truth)));
      write_file(dir / "scm.json", scm_to_json(scm));
    } else if (*disc) {
      const Dataset data = load_data(disc_data, disc_schema);
      const Skeleton skeleton = reindex(skeleton_from_json(slurp(disc_skeleton)), data.names());
      DiscoveryConfig config = shared.discovery();
      Dag result;
      if (disc_method == "peel") {
        std::optional<Dag> truth;
        if (disc_ci == "dsep") {
          if (disc_truth.empty()) throw InvalidParameter("--ci dsep requires --truth");
          truth = reindex(dag_from_json(slurp(disc_truth)), data.names());
          config.ci = DiscoveryConfig::Ci::kDSeparation;
        }
        result = peel(data, skeleton, config, truth ? &*truth : nullptr).dag;
      } else if (disc_method == "enumerate") {
        auto r = enumerate_discover(data, skeleton, config);
        if (!disc_scores.empty()) write_file(disc_scores, scores_to_csv(r.scores));
        result = r.best;
      } else {
        result = anm_baseline(data, skeleton, config.alpha).dag;
      }
      emit(disc_out, dag_to_json(result));
    } else if (*eval) {
      const Dag a = dag_from_json(slurp(eval_a));
      const Dag b = reindex(dag_from_json(slurp(eval_b)), a.names());
      std::cout << shd(a, b) << "\n";
    } else if (*exp) {
      ExperimentConfig config = read_experiment_config(exp_config);
      if (shared.seed_given) config.seed = shared.seed;
      emit(exp_out, results_to_csv(run_experiment(config, exp_jobs)));
    } else if (*pct) {
      const Dataset data = load_data(pct_data, pct_schema);
      const Dag truth = reindex(dag_from_json(slurp(pct_truth)), data.names());
      const Skeleton skeleton =
          pct_skeleton.empty() ? Skeleton(truth) : reindex(skeleton_from_json(slurp(pct_skeleton)), data.names());
      DiscoveryConfig config = shared.discovery();
      config.percentile_samples = pct_samples;
      config.enumeration_cap = pct_cap;
      Rng rng(shared.seed);
      const auto r = percentile(data, truth, skeleton, config, rng);
      if (!pct_scores.empty()) write_file(pct_scores, scores_to_csv(r.scores));
      if (r.underfilled) std::cerr << "note: only " << r.candidates - 1 << " distinct orientations were sampled\n";
      std::printf("%.4f\n", r.percentile);
    } else if (*bif_sample_cmd) {
      const BayesNet net = read_bif(bif_path);
      for (const auto& w : net.warnings) std::cerr << "warning: " << w << "\n";
      Rng rng(shared.seed);
      const Dataset data = bn_sample(net, bif_samples, rng);
      const fs::path dir(bif_out);
      write_file(dir / "data.csv", dataset_to_csv(data));
      write_file(dir / "schema.json", dataset_schema_json(data));
      write_file(dir / "truth.json", dag_to_json(bn_truth(net)));
      write_file(dir / "states.json", state_names_json(net));
    } else if (*plot) {
      emit(plot_out, plot_svg(slurp(plot_results), plot_x, plot_y, plot_group));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
