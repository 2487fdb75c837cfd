#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "decomp/constraints.hpp"
#include "decomp/dynamics.hpp"
#include "decomp/graph.hpp"
#include "decomp/io.hpp"
#include "decomp/modes.hpp"
#include "decomp/pipeline.hpp"
#include "decomp/scenario.hpp"

namespace py = pybind11;
using namespace decomp;

namespace {

using Rows = py::array_t<double, py::array::c_style | py::array::forcecast>;

constexpr const char* kColumns[] = {"t", "x", "y", "psi", "v", "omega", "u_lat", "u_lon"};

Rows trajectory_array(const Trajectory& tr) {
    Rows out({static_cast<py::ssize_t>(tr.size()), py::ssize_t{8}});
    auto a = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const auto& s = tr[i];
        const double row[8] = {s.t, s.state.x, s.state.y, s.state.psi, s.state.v, s.state.omega, s.input.u_lat,
                               s.input.u_lon};
        for (py::ssize_t k = 0; k < 8; ++k) a(static_cast<py::ssize_t>(i), k) = row[k];
    }
    return out;
}

Trajectory trajectory_from(const Rows& rows) {
    if (rows.ndim() != 2 || rows.shape(1) != 8)
        throw ValidationError("trajectory array must be N x 8 (t, x, y, psi, v, omega, u_lat, u_lon)");
    auto a = rows.unchecked<2>();
    std::vector<TrajectorySample> s(static_cast<std::size_t>(rows.shape(0)));
    for (py::ssize_t i = 0; i < rows.shape(0); ++i)
        s[static_cast<std::size_t>(i)] = {a(i, 0), {a(i, 1), a(i, 2), a(i, 3), a(i, 4), a(i, 5)}, {a(i, 6), a(i, 7)}};
    return Trajectory(std::move(s));
}

VehicleParams vehicle_from(const py::object& v) {
    if (v.is_none()) return {};
    return vehicle_from_json(nlohmann::json::parse(py::str(py::module_::import("json").attr("dumps")(v)).cast<std::string>()));
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Guidance-behaviour decomposition core";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<StageError>(m, "StageError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());

    m.attr("TRAJECTORY_COLUMNS") = py::make_tuple(kColumns[0], kColumns[1], kColumns[2], kColumns[3], kColumns[4],
                                                  kColumns[5], kColumns[6], kColumns[7]);
    m.def("stage_names", &stage_names);

    m.def(
        "run_manifest",
        [](const std::filesystem::path& path, std::size_t workers) {
            RunManifest man = load_manifest(path);
            if (workers) man.workers = workers;
            nlohmann::json rep;
            {
                py::gil_scoped_release nogil;
                rep = run_pipeline(man);
            }
            return to_python(rep);
        },
        py::arg("path"), py::arg("workers") = 0, "Run a manifest file; returns the report.");
    m.def(
        "run",
        [](const py::dict& manifest, const std::filesystem::path& base_dir) {
            RunManifest man = manifest_from_json(from_python(manifest), base_dir);
            nlohmann::json rep;
            {
                py::gil_scoped_release nogil;
                rep = run_pipeline(man);
            }
            return to_python(rep);
        },
        py::arg("manifest"), py::arg("base_dir") = std::filesystem::path("."),
        "Run a manifest given as a dict; relative paths resolve against base_dir.");

    m.def(
        "step",
        [](std::array<double, 5> s, double u_lat, double u_lon, double dt, const py::object& vehicle,
           const std::string& integrator) {
            const auto r = step_dynamics({s[0], s[1], s[2], s[3], s[4]}, {u_lat, u_lon}, vehicle_from(vehicle), dt,
                                         integrator_from_string(integrator));
            return std::array<double, 5>{r.x, r.y, r.psi, r.v, r.omega};
        },
        py::arg("state"), py::arg("u_lat"), py::arg("u_lon"), py::arg("dt") = 0.02, py::arg("vehicle") = py::none(),
        py::arg("integrator") = "rk4", "One step of the vehicle model; state is (x, y, psi, v, omega).");

    m.def(
        "load_trajectory", [](const std::filesystem::path& p) { return trajectory_array(io::load_trajectory(p)); },
        py::arg("path"));
    m.def(
        "label_constraints",
        [](const Rows& rows, const py::object& vehicle, double eps_fraction) {
            const auto p = vehicle_from(vehicle);
            const auto labels = label_constraints(trajectory_from(rows), p, ConstraintTolerances::defaults(p, eps_fraction));
            py::array_t<int> out({static_cast<py::ssize_t>(labels.size()), py::ssize_t{4}});
            auto a = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < labels.size(); ++i)
                for (std::size_t k = 0; k < 4; ++k) a(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(k)) = labels[i].at(k);
            return out;
        },
        py::arg("trajectory"), py::arg("vehicle") = py::none(), py::arg("eps_fraction") = 0.02,
        "Constraint codes (u_lat, u_lon, omega, v) per sample, each in {-1, 0, 1}.");

    m.def(
        "sice",
        [](const Eigen::MatrixXd& cov, double lambda, double edge_tol) {
            SiceOptions o;
            o.lambda = lambda;
            const auto g = sice_fit(cov, o, {}, edge_tol);
            return py::make_tuple(g.precision, g.edges);
        },
        py::arg("cov"), py::arg("lam") = 0.1, py::arg("edge_tol") = 0.01,
        "Sparse inverse covariance; returns (precision, edges).");

    m.def(
        "viterbi",
        [](const std::vector<int>& obs, const Eigen::MatrixXd& T, const Eigen::MatrixXd& Z,
           const Eigen::VectorXd& prior) { return viterbi_decode(obs, T, Z, prior); },
        py::arg("observations"), py::arg("T"), py::arg("Z"), py::arg("prior"));

    m.def(
        "class_similarity",
        [](const std::set<Edge>& ei, std::array<int, 4> ci, const std::set<Edge>& ej, std::array<int, 4> cj,
           double w) {
            return class_similarity(ei, {ci[0], ci[1], ci[2], ci[3]}, ej, {cj[0], cj[1], cj[2], cj[3]}, w);
        },
        py::arg("edges_i"), py::arg("code_i"), py::arg("edges_j"), py::arg("code_j"), py::arg("w") = 0.125,
        "Jaccard index of two edge sets minus w times the L1 distance of the codes.");
}
