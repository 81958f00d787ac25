#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "entropic/discovery.hpp"
#include "entropic/graphs.hpp"

namespace entropic {

// One discovery method of an experiment: "peel", "enumerate" or "anm",
// with the oracle measure for the entropic ones.
struct MethodSpec {
  std::string algorithm;
  Measure measure = Measure::kTotal;

  std::string label() const;
  // "enumerate", "peel:exogenous", "anm", ...
  static MethodSpec parse(const std::string& s);
};

// Experiment grid; see docs/experiment_config.md for the JSON schema.
struct ExperimentConfig {
  int version = 1;
  std::string id = "experiment";
  std::string graph = "triangle";
  std::string model = "unconstrained";  // or "anm"
  int n_states = 10;
  int m_states = 10;
  // Target exogenous entropy in bits, or the cyclic half-width for "anm".
  std::vector<double> noise{1.0};
  double noise_tol = 0.05;
  // Sample sizes; 0 means the exact joint distribution.
  std::vector<std::size_t> samples{10000};
  std::vector<MethodSpec> methods{MethodSpec{"enumerate", Measure::kTotal}};
  int replicates = 25;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double smoothing = 0.0;
  std::string ci = "gtest";  // or "dsep"
  bool high_entropy_sources = false;
  double edge_prob = 0.5;
  // When false, runtime_ms is written as 0 so reruns are byte-identical.
  bool timing = true;

  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig read_experiment_config(const std::string& path);

struct ResultRecord {
  std::string experiment;
  std::string graph;
  std::string method;
  std::string measure;
  int n_states = 0;
  std::size_t samples = 0;
  double noise = 0.0;
  int replicate = 0;
  std::uint64_t seed = 0;
  int shd = -1;  // -1 when the replicate failed
  long long runtime_ms = 0;
  std::string error;

  std::size_t cell = 0;
  std::size_t method_index = 0;
};

// Builds a named graph: line, line-k, triangle, diamond, hall, complete-k,
// g1, g2, g3, or a graph JSON file. random-k is drawn from `rng`.
Dag graph_from_spec(const std::string& spec, double edge_prob, Rng& rng);

// Runs every (cell, replicate) with its own derived seed and returns records
// sorted by (cell, method, replicate). `jobs` > 1 runs replicates on threads.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, int jobs = 1);

std::string results_csv_header();
std::string results_to_csv(const std::vector<ResultRecord>& records);

// Mean of `y` per `x` for each `group`, with standard-error whiskers.
std::string plot_svg(const std::string& csv_text, const std::string& x, const std::string& y,
                     const std::string& group);

}  // namespace entropic
