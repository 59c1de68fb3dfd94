#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bethelab/bp.hpp"
#include "bethelab/cavity.hpp"
#include "bethelab/experiments.hpp"
#include "bethelab/io.hpp"
#include "bethelab/observables.hpp"
#include "bethelab/pinning.hpp"

namespace py = pybind11;
using namespace bethelab;

namespace {

Event subcube(std::vector<int> I, std::vector<int> sigma) {
  // 1-based on the Python side, like the file formats.
  for (int& i : I) --i;
  return SubcubeEvent{std::move(I), std::move(sigma)};
}

py::array_t<double> probs_array(const DenseMeasure& mu) {
  const auto p = mu.probs();
  return py::array_t<double>(static_cast<py::ssize_t>(p.size()), p.data());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact Gibbs measures, cut distances, pinning and Bethe-state checks on small factor graphs";

  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<ZeroNormalizer>(m, "ZeroNormalizer", PyExc_ArithmeticError);
  py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<FactorGraph>(m, "FactorGraph")
      .def_static(
          "from_json", [](const std::string& text) { return io::graph_from_json(io::Json::parse(text)); },
          py::arg("text"))
      .def("to_json", [](const FactorGraph& g) { return io::graph_to_json(g).dump(); })
      .def_property_readonly("n", &FactorGraph::num_variables)
      .def_property_readonly("q", &FactorGraph::q)
      .def_property_readonly("num_constraints", &FactorGraph::num_constraints)
      .def("is_acyclic", [](const FactorGraph& g) { return is_acyclic(g); })
      .def(
          "pin",
          [](const FactorGraph& g, std::vector<int> I, const std::vector<int>& sigma) {
            for (int& i : I) --i;
            return pin_graph(g, I, sigma);
          },
          py::arg("I"), py::arg("sigma"));

  m.def(
      "sample_graph",
      [](const std::string& model_json) { return sample_graph(io::model_from_json(io::Json::parse(model_json)).to_spec()); },
      py::arg("model_json"), "Sample from a model spec given as JSON text.");

  py::class_<DenseMeasure>(m, "DenseMeasure")
      .def(py::init([](int n, int q, std::vector<double> probs) { return DenseMeasure(n, SpinDomain(q), std::move(probs)); }),
           py::arg("n"), py::arg("q"), py::arg("probs"))
      .def_property_readonly("n", &DenseMeasure::n)
      .def_property_readonly("q", &DenseMeasure::q)
      .def_property_readonly("probs", &probs_array)
      .def("__len__", &DenseMeasure::size);

  m.def(
      "gibbs",
      [](const FactorGraph& g, std::size_t budget) {
        auto t = gibbs_table(g, Budget{budget});
        return py::make_tuple(t.Z, t.mu);
      },
      py::arg("graph"), py::arg("budget") = Budget{}.max_configurations, "Returns (Z, mu).");
  m.def(
      "marginal",
      [](const DenseMeasure& mu, std::vector<int> I) {
        for (int& i : I) --i;
        return marginal(mu, I);
      },
      py::arg("mu"), py::arg("I"));
  m.def("condition", [](const DenseMeasure& mu, std::vector<int> I, std::vector<int> sigma) {
    return condition(mu, subcube(std::move(I), std::move(sigma)));
  }, py::arg("mu"), py::arg("I"), py::arg("sigma"));
  m.def("product_of_marginals", &product_of_marginals, py::arg("mu"));
  m.def("tv_distance", py::overload_cast<const DenseMeasure&, const DenseMeasure&>(&tv_distance), py::arg("mu"),
        py::arg("nu"));
  m.def("symmetry_score", &symmetry_score, py::arg("mu"), py::arg("order") = 2);

  m.def(
      "cut_distance",
      [](const DenseMeasure& mu, const DenseMeasure& nu, const std::string& mode) {
        return io::witness_to_json(cut_distance(mu, nu, parse_cut_mode(mode))).dump();
      },
      py::arg("mu"), py::arg("nu"), py::arg("mode") = "exact",
      "Witness report as JSON text: value, mode, coupling_support_size, adversary.");

  m.def(
      "bethe_deviation",
      [](const FactorGraph& g, int l, int r, std::vector<int> I, std::vector<int> sigma) {
        return io::bethe_report_to_json(bethe_deviation(g, l, r, subcube(std::move(I), std::move(sigma)))).dump();
      },
      py::arg("graph"), py::arg("l"), py::arg("r"), py::arg("I") = std::vector<int>{},
      py::arg("sigma") = std::vector<int>{});
  m.def(
      "canonical_residual",
      [](const FactorGraph& g, std::vector<int> I, std::vector<int> sigma) {
        return canonical_residual(g, subcube(std::move(I), std::move(sigma)));
      },
      py::arg("graph"), py::arg("I") = std::vector<int>{}, py::arg("sigma") = std::vector<int>{});
  m.def(
      "overlap_d1",
      [](const DenseMeasure& mu, const DenseMeasure& nu) {
        return overlap_d1(overlap_distribution(mu), overlap_distribution(nu));
      },
      py::arg("mu"), py::arg("nu"));

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto config = config_from_json(io::Json::parse(config_json));
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(config);
        }
        return py::make_tuple(render_summary(res), render_csv(res.header, res.rows));
      },
      py::arg("config_json"), "Returns (summary.json text, cells.csv text).");
}
