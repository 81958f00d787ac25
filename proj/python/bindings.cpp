// Python bindings. Functions that consume randomness take an integer seed.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "entropic/bifio.hpp"
#include "entropic/citest.hpp"
#include "entropic/coupling.hpp"
#include "entropic/discovery.hpp"
#include "entropic/errors.hpp"
#include "entropic/experiment.hpp"
#include "entropic/graphs.hpp"
#include "entropic/probcore.hpp"
#include "entropic/scm.hpp"

namespace py = pybind11;
using namespace entropic;

namespace {

std::vector<Categorical> to_categoricals(const std::vector<std::vector<double>>& ps) {
  std::vector<Categorical> out;
  out.reserve(ps.size());
  for (const auto& p : ps) out.emplace_back(p);
  return out;
}

DiscoveryConfig make_config(const std::string& measure, double alpha, double smoothing, std::uint64_t seed) {
  DiscoveryConfig c;
  c.measure = parse_measure(measure);
  c.alpha = alpha;
  c.smoothing = smoothing;
  c.seed = seed;
  c.validate();
  return c;
}

py::list scores_list(const std::vector<ScoredOrientation>& scores) {
  py::list out;
  for (const auto& s : scores) out.append(py::make_tuple(std::vector<bool>(s.bits), s.score, s.is_truth));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entropic causal discovery over categorical data";

  auto base = py::register_exception<Error>(m, "EntropicError", PyExc_RuntimeError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
  py::register_exception<InsufficientData>(m, "InsufficientData", base.ptr());
  py::register_exception<TargetUnreachable>(m, "TargetUnreachable", base.ptr());
  py::register_exception<ConvergenceFailure>(m, "ConvergenceFailure", base.ptr());
  py::register_exception<UnsupportedSize>(m, "UnsupportedSize", base.ptr());
  py::register_exception<TooManyOrientations>(m, "TooManyOrientations", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  // probcore
  m.def("entropy", [](const std::vector<double>& p) { return entropy(Categorical(p)); }, py::arg("p"),
        "Shannon entropy in bits of a probability vector.");
  m.def(
      "dirichlet",
      [](std::size_t k, double alpha, std::uint64_t seed) {
        Rng rng(seed);
        return dirichlet_sample(k, alpha, rng).probs();
      },
      py::arg("k"), py::arg("alpha"), py::arg("seed") = 0);
  m.def(
      "targeted_dirichlet",
      [](std::size_t k, double target_bits, double tol, std::uint64_t seed) {
        Rng rng(seed);
        return entropy_targeted_dirichlet(k, target_bits, tol, rng).probs();
      },
      py::arg("k"), py::arg("target_bits"), py::arg("tol") = 0.05, py::arg("seed") = 0);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<std::vector<std::string>, std::vector<int>, std::vector<std::vector<int>>, std::vector<double>>(),
           py::arg("names"), py::arg("cards"), py::arg("columns"), py::arg("weights") = std::vector<double>{})
      .def_property_readonly("names", &Dataset::names)
      .def_property_readonly("cards", &Dataset::cards)
      .def_property_readonly("num_rows", &Dataset::num_rows)
      .def_property_readonly("num_vars", &Dataset::num_vars)
      .def("column", &Dataset::column, py::arg("index"))
      .def("to_csv", &dataset_to_csv)
      .def("schema_json", &dataset_schema_json)
      .def_static("from_csv", &parse_dataset_csv, py::arg("text"))
      .def_static("read_csv", &read_dataset_csv, py::arg("path"))
      .def("with_schema", &apply_schema, py::arg("schema_json"));
  m.def(
      "empirical_conditionals",
      [](const Dataset& d, int target, const std::vector<int>& given, double smoothing) {
        py::list out;
        for (const auto& e : empirical_conditionals(d, target, given, smoothing)) {
          out.append(py::make_tuple(e.config, e.weight, e.conditional.probs()));
        }
        return out;
      },
      py::arg("data"), py::arg("target"), py::arg("given"), py::arg("smoothing") = 0.0,
      "List of (configuration, weight, conditional) for each observed configuration.");

  // coupling
  m.def(
      "greedy_coupling",
      [](const std::vector<std::vector<double>>& marginals) {
        const auto ms = to_categoricals(marginals);
        const Coupling c = greedy_coupling(ms);
        py::list cells;
        for (const auto& cell : c.cells) cells.append(py::make_tuple(cell.index, cell.mass));
        return py::make_tuple(cells, c.entropy_bits);
      },
      py::arg("marginals"), "Greedy minimum-entropy coupling as (cells, entropy_bits).");
  m.def(
      "greedy_coupling_entropy",
      [](const std::vector<std::vector<double>>& marginals) {
        return greedy_coupling_entropy(to_categoricals(marginals));
      },
      py::arg("marginals"));
  m.def(
      "mec",
      [](const Dataset& d, int target, const std::vector<int>& given, double smoothing) {
        return mec(d, target, given, smoothing);
      },
      py::arg("data"), py::arg("target"), py::arg("given"), py::arg("smoothing") = 0.0);

  // graphs
  py::class_<Dag>(m, "Dag")
      .def(py::init<std::vector<std::string>, std::vector<Edge>>(), py::arg("names"), py::arg("edges"))
      .def_property_readonly("names", &Dag::names)
      .def_property_readonly("edges", &Dag::edges)
      .def("parents", &Dag::parents, py::arg("v"))
      .def("children", &Dag::children, py::arg("v"))
      .def("to_json", &dag_to_json)
      .def_static("from_json", &dag_from_json, py::arg("text"))
      .def("__eq__", [](const Dag& a, const Dag& b) { return a == b; })
      .def("__repr__", [](const Dag& g) { return "Dag(" + dag_to_json(g).substr(0, dag_to_json(g).size() - 1) + ")"; });
  py::class_<Skeleton>(m, "Skeleton")
      .def(py::init<std::vector<std::string>, std::vector<Edge>>(), py::arg("names"), py::arg("links"))
      .def(py::init<const Dag&>(), py::arg("dag"))
      .def_property_readonly("names", &Skeleton::names)
      .def_property_readonly("links", &Skeleton::links)
      .def("to_json", &skeleton_to_json)
      .def_static("from_json", &skeleton_from_json, py::arg("text"))
      .def("__eq__", [](const Skeleton& a, const Skeleton& b) { return a == b; });
  m.def("shd", &shd, py::arg("a"), py::arg("b"));
  m.def("d_separated", &d_separated, py::arg("dag"), py::arg("i"), py::arg("j"), py::arg("cond"));
  m.def("topological_order", &topological_order, py::arg("dag"));
  m.def("enumerate_orientations", &enumerate_orientations, py::arg("skeleton"), py::arg("cap") = 1'000'000);
  m.def("orientation_bits", &orientation_bits, py::arg("dag"), py::arg("skeleton"));
  m.def(
      "rf_graph_decomposition",
      [](const Dag& g, int src, int y) { return rf_graph_decomposition(g, src, y).color; }, py::arg("dag"),
      py::arg("src"), py::arg("y"), "Colors per node; -1 marks nodes off every src -> y path.");
  m.def(
      "named_graph",
      [](const std::string& spec, double edge_prob, std::uint64_t seed) {
        Rng rng(seed);
        return graph_from_spec(spec, edge_prob, rng);
      },
      py::arg("spec"), py::arg("edge_prob") = 0.5, py::arg("seed") = 0);
  m.def("reindex", py::overload_cast<const Dag&, const std::vector<std::string>&>(&reindex), py::arg("dag"),
        py::arg("names"));

  // scm
  py::class_<Scm>(m, "Scm")
      .def_property_readonly("graph", &Scm::graph)
      .def("to_json", &scm_to_json)
      .def_static("from_json", &scm_from_json, py::arg("text"));
  m.def(
      "random_scm",
      [](const Dag& g, int n, int m_states, double noise_bits, double tol, bool hes, std::uint64_t seed) {
        Rng rng(seed);
        return random_scm(g, n, m_states, NoiseSpec::targeted(noise_bits, tol), hes, rng);
      },
      py::arg("dag"), py::arg("n_states"), py::arg("m_states"), py::arg("noise_bits"), py::arg("tol") = 0.05,
      py::arg("high_entropy_sources") = false, py::arg("seed") = 0);
  m.def(
      "anm_scm",
      [](const Dag& g, int n, int k, std::uint64_t seed) {
        Rng rng(seed);
        return anm_scm(g, n, k, rng);
      },
      py::arg("dag"), py::arg("n_states"), py::arg("half_width"), py::arg("seed") = 0);
  m.def(
      "sample",
      [](const Scm& scm, std::size_t n, std::uint64_t seed) {
        Rng rng(seed);
        return sample(scm, n, rng);
      },
      py::arg("scm"), py::arg("n_samples"), py::arg("seed") = 0);
  m.def(
      "exact_joint", [](const Scm& scm) { return exact_joint(scm).to_dataset(); }, py::arg("scm"),
      "Exact joint distribution as a weighted dataset.");

  // citest
  m.def(
      "g_test",
      [](const Dataset& d, int i, int j, const std::vector<int>& cond, double alpha) {
        const CiResult r = g_test_ci(d, i, j, cond, alpha);
        py::dict out;
        out["statistic"] = r.statistic;
        out["dof"] = r.dof;
        out["p_value"] = r.p_value;
        out["independent"] = r.independent;
        out["degenerate"] = r.degenerate;
        return out;
      },
      py::arg("data"), py::arg("i"), py::arg("j"), py::arg("cond") = std::vector<int>{}, py::arg("alpha") = 0.05);

  // discovery
  m.def(
      "oracle",
      [](const Dataset& d, int i, int j, const std::vector<int>& cond, const std::string& measure) {
        const OracleVerdict v = mec_oracle(d, i, j, cond, parse_measure(measure));
        return py::make_tuple(v.from, v.to, v.forward_score, v.reverse_score);
      },
      py::arg("data"), py::arg("i"), py::arg("j"), py::arg("cond") = std::vector<int>{},
      py::arg("measure") = "total", "(from, to, forward_score, reverse_score).");
  m.def(
      "peel",
      [](const Dataset& d, const Skeleton* skeleton, const std::string& measure, double alpha) {
        const DiscoveryConfig c = make_config(measure, alpha, 0.0, 0);
        return skeleton ? peel(d, *skeleton, c).dag : peel(d, c).dag;
      },
      py::arg("data"), py::arg("skeleton") = nullptr, py::arg("measure") = "total", py::arg("alpha") = 0.05,
      "Source peeling; with a skeleton the source order orients its links.");
  m.def(
      "enumerate_discover",
      [](const Dataset& d, const Skeleton& s, double smoothing) {
        const auto r = enumerate_discover(d, s, make_config("total", 0.05, smoothing, 0));
        return py::make_tuple(r.best, r.score, scores_list(r.scores));
      },
      py::arg("data"), py::arg("skeleton"), py::arg("smoothing") = 0.0,
      "(best dag, score, [(bits, score, is_truth), ...]).");
  m.def(
      "percentile",
      [](const Dataset& d, const Dag& truth, const Skeleton* skeleton, std::size_t samples, std::uint64_t seed) {
        DiscoveryConfig c = make_config("total", 0.05, 0.0, seed);
        c.percentile_samples = samples;
        Rng rng(seed);
        return percentile(d, truth, skeleton ? *skeleton : Skeleton(truth), c, rng).percentile;
      },
      py::arg("data"), py::arg("truth"), py::arg("skeleton") = nullptr, py::arg("samples") = 9999,
      py::arg("seed") = 0);
  m.def("percentile_from_counts", &percentile_from_counts, py::arg("strictly_better"), py::arg("total"));
  m.def(
      "anm_baseline", [](const Dataset& d, const Skeleton& s, double alpha) { return anm_baseline(d, s, alpha).dag; },
      py::arg("data"), py::arg("skeleton"), py::arg("alpha") = 0.05);

  // bifio
  py::class_<BayesNet>(m, "BayesNet")
      .def_property_readonly("names",
                             [](const BayesNet& n) {
                               std::vector<std::string> out;
                               for (const auto& v : n.variables) out.push_back(v.name);
                               return out;
                             })
      .def_property_readonly("parents", [](const BayesNet& n) { return n.parents; })
      .def_property_readonly("warnings", [](const BayesNet& n) { return n.warnings; })
      .def("truth", &bn_truth)
      .def("state_names_json", &state_names_json)
      .def(
          "sample",
          [](const BayesNet& n, std::size_t count, std::uint64_t seed) {
            Rng rng(seed);
            return bn_sample(n, count, rng);
          },
          py::arg("n_samples"), py::arg("seed") = 0);
  m.def("parse_bif", [](const std::string& text) { return parse_bif(text); }, py::arg("text"));
  m.def("read_bif", &read_bif, py::arg("path"));

  // experiment
  m.def(
      "run_experiment",
      [](const std::string& config_json, int jobs) {
        return results_to_csv(run_experiment(parse_experiment_config(config_json), jobs));
      },
      py::arg("config_json"), py::arg("jobs") = 1, "Runs an experiment config and returns the results CSV text.");
  m.def("plot_svg", &plot_svg, py::arg("results_csv"), py::arg("x") = "noise", py::arg("y") = "shd",
        py::arg("group") = "method");
}
