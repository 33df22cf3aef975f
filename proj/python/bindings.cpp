#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "calderon/forward.hpp"
#include "calderon/io.hpp"
#include "calderon/lattice.hpp"
#include "calderon/operators.hpp"
#include "calderon/reconstruction.hpp"
#include "calderon/verification.hpp"

namespace py = pybind11;
using namespace calderon;

namespace {

std::vector<int> coords(const Lattice& lat, NodeId p) {
  const auto x = lat.coords(p);
  return {x.begin(), x.end()};
}

Corner corner_from(const std::string& s) {
  Corner c;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw std::invalid_argument("corner flags must be 0/1");
    c.flags.push_back(ch == '1');
  }
  return c;
}

py::dict slice_dict(const SliceDiagnostics& s) {
  py::dict d;
  d["corner"] = s.corner.to_string();
  d["level"] = s.level;
  d["kernel_dim_numerical"] = s.kernel_dim_numerical;
  d["kernel_dim_expected"] = s.kernel_dim_expected;
  d["quotient_dim"] = s.quotient_dim;
  d["containment_residual"] = s.containment_residual;
  d["cauchy_residual"] = s.cauchy_residual;
  d["flux_residual"] = s.flux_residual;
  d["flux_min_singular_ratio"] = s.flux_min_singular_ratio;
  d["num_edges"] = s.num_edges;
  d["degraded"] = s.degraded;
  return d;
}

}  // namespace

PYBIND11_MODULE(_calderon, m) {
  m.doc() = "Discrete inverse conductivity on hypercubic lattices";

  py::class_<Lattice>(m, "Lattice")
      .def(py::init<int, int>(), py::arg("dim"), py::arg("n"))
      .def_property_readonly("dim", &Lattice::dim)
      .def_property_readonly("n", &Lattice::size)
      .def_property_readonly("num_nodes", &Lattice::num_nodes)
      .def_property_readonly("num_interior", &Lattice::num_interior)
      .def_property_readonly("num_boundary", &Lattice::num_boundary)
      .def_property_readonly("num_edges", &Lattice::num_edges)
      .def("coords", &coords, py::arg("node"))
      .def("find", [](const Lattice& lat, const std::vector<int>& x) { return lat.find(x); }, py::arg("coords"))
      .def("edges",
           [](const Lattice& lat) {
             std::vector<std::pair<NodeId, NodeId>> out;
             for (const auto& e : lat.edges()) out.emplace_back(e.a, e.b);
             return out;
           })
      .def("edge_level", &Lattice::edge_level, py::arg("edge"))
      .def("interface_edges", &Lattice::interface_edges, py::arg("t"))
      .def(
          "slice_sets",
          [](const Lattice& lat, int t) {
            const auto s = lat.slice_sets(t);
            py::dict d;
            d["L"] = s.L;
            d["K_minus"] = s.K_minus;
            d["K_plus"] = s.K_plus;
            d["J"] = s.J;
            d["L_cum"] = s.L_cum;
            d["J_cum"] = s.J_cum;
            return d;
          },
          py::arg("t"))
      .def("expected_kernel_dim", [](const Lattice& lat, int t) { return expected_kernel_dim(lat, t); }, py::arg("t"));

  m.def(
      "random_conductivity",
      [](const Lattice& lat, double lo, double hi, std::uint64_t seed) {
        return ConductivityField::uniform(lat, lo, hi, seed).values();
      },
      py::arg("lattice"), py::arg("lo") = 1.0, py::arg("hi") = 2.0, py::arg("seed") = 0);

  m.def(
      "assemble_dtn",
      [](const Lattice& lat, const std::vector<double>& gamma) {
        return assemble_dtn(lat, ConductivityField(lat, gamma)).entries;
      },
      py::arg("lattice"), py::arg("gamma"), "Dirichlet-to-Neumann matrix in canonical boundary order.");

  m.def(
      "solve_dirichlet",
      [](const Lattice& lat, const std::vector<double>& gamma, const Eigen::VectorXd& phi) {
        return solve_dirichlet(lat, ConductivityField(lat, gamma), phi);
      },
      py::arg("lattice"), py::arg("gamma"), py::arg("phi"));

  m.def(
      "kernel_dimension",
      [](const Lattice& lat, const Eigen::MatrixXd& dtn, int t, double tol) {
        return kernel_basis(extract_T(lat, dtn, t), tol).dim();
      },
      py::arg("lattice"), py::arg("dtn"), py::arg("t"), py::arg("tol") = 1e-10);

  m.def(
      "reconstruct",
      [](const Lattice& lat, const Eigen::MatrixXd& dtn, const std::vector<std::string>& corners, double kernel_tol) {
        ReconstructionOptions opts;
        opts.kernel_tol = kernel_tol;
        for (const auto& c : corners) opts.corners.push_back(corner_from(c));
        ReconstructionReport rep;
        {
          py::gil_scoped_release release;
          rep = reconstruct(lat, dtn, opts);
        }
        py::dict d;
        d["gamma"] = rep.estimates;
        std::vector<py::object> src;
        for (int c : rep.source_corner)
          src.push_back(c < 0 ? py::object(py::none()) : py::object(py::str(rep.corners[c].to_string())));
        d["corner"] = src;
        py::list slices;
        for (const auto& s : rep.slices) slices.append(slice_dict(s));
        d["slices"] = slices;
        d["diagnostics"] = rep.diagnostics;
        d["degraded_slices"] = rep.degraded_slices;
        d["uncovered_edges"] = rep.uncovered_edges;
        return d;
      },
      py::arg("lattice"), py::arg("dtn"), py::arg("corners") = std::vector<std::string>{},
      py::arg("kernel_tol") = 1e-10, "Recovered conductivities; corners default to all 2^d.");

  m.def(
      "run_property_suite",
      [](int dim, int n, std::uint64_t seed) {
        const auto r = run_property_suite(dim, n, seed);
        py::list out;
        for (const auto& c : r.checks) {
          py::dict d;
          d["name"] = c.name;
          d["passed"] = c.passed;
          d["value"] = c.value;
          d["threshold"] = c.threshold;
          d["detail"] = c.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("dim"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "problem_json",
      [](const Lattice& lat, const std::vector<double>& gamma, std::uint64_t seed, double lo, double hi) {
        return io::to_json(io::ProblemFile{lat.dim(), lat.size(), gamma, seed, lo, hi});
      },
      py::arg("lattice"), py::arg("gamma"), py::arg("seed") = 0, py::arg("lo") = 1.0, py::arg("hi") = 2.0);

  m.def(
      "parse_problem",
      [](const std::string& text) {
        const auto f = io::parse_problem(text);
        return py::make_tuple(Lattice(f.dim, f.size), f.gamma);
      },
      py::arg("text"));

  py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);
}
