#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "sabrfem/cli.hpp"
#include "sabrfem/config.hpp"
#include "sabrfem/errors.hpp"
#include "sabrfem/model.hpp"
#include "sabrfem/oracles.hpp"
#include "sabrfem/pricing.hpp"
#include "sabrfem/studies.hpp"
#include "sabrfem/timestepper.hpp"

namespace py = pybind11;
using namespace sabrfem;

namespace {

Payoff make_payoff(const std::string& kind, double strike) {
    if (kind == "put") return Payoff::put(strike);
    if (kind == "call") return Payoff::call(strike);
    if (kind == "mass_zero_put") return Payoff::mass_zero_put(strike);
    if (kind == "identity") return Payoff::identity();
    throw ValidationError("payoff", "expected put, call, mass_zero_put or identity");
}

OptionType option_type(const std::string& s) {
    if (s == "put") return OptionType::put;
    if (s == "call") return OptionType::call;
    throw ValidationError("option", "expected put or call");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite element pricing under the SABR model";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<SingularIntegralError>(m, "SingularIntegralError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<SabrParams>(m, "SabrParams")
        .def(py::init([](double beta, double rho, double nu, double x0, double y0) {
                 return SabrParams{beta, rho, nu, x0, y0};
             }),
             py::arg("beta") = 0.5, py::arg("rho") = 0.0, py::arg("nu") = 0.0, py::arg("x0") = 1.0,
             py::arg("y0") = 0.2)
        .def_readwrite("beta", &SabrParams::beta)
        .def_readwrite("rho", &SabrParams::rho)
        .def_readwrite("nu", &SabrParams::nu)
        .def_readwrite("x0", &SabrParams::x0)
        .def_readwrite("y0", &SabrParams::y0)
        .def("__repr__", [](const SabrParams& p) {
            std::ostringstream os;
            os << "SabrParams(beta=" << p.beta << ", rho=" << p.rho << ", nu=" << p.nu << ", x0=" << p.x0
               << ", y0=" << p.y0 << ")";
            return os.str();
        });

    py::class_<WellPosednessCert>(m, "WellPosednessCert")
        .def_readonly("delta", &WellPosednessCert::delta)
        .def_readonly("epsilon", &WellPosednessCert::epsilon)
        .def_readonly("C1", &WellPosednessCert::C1)
        .def_readonly("C2", &WellPosednessCert::C2)
        .def_readonly("C3", &WellPosednessCert::C3)
        .def_readonly("mu", &WellPosednessCert::mu)
        .def_readonly("warnings", &WellPosednessCert::warnings);

    m.def(
        "is_well_posed", [](const SabrParams& p) { return validate_params(p).accepted; }, py::arg("params"),
        "True iff |rho| nu^2 < 2; raises ValidationError for out-of-range fields.");
    m.def(
        "wellposedness_constants",
        [](const SabrParams& p, py::object mu) {
            return wellposedness_constants(p, mu.is_none() ? NAN : mu.cast<double>());
        },
        py::arg("params"), py::arg("mu") = py::none());

    py::enum_<OriginBC>(m, "OriginBC").value("absorbing", OriginBC::absorbing).value("free", OriginBC::free);
    py::enum_<VolEdgeBC>(m, "VolEdgeBC").value("intrinsic", VolEdgeBC::intrinsic).value("zero", VolEdgeBC::zero);

    py::class_<DiscretizationSpec>(m, "DiscretizationSpec")
        .def(py::init<>())
        .def_readwrite("R_x", &DiscretizationSpec::R_x)
        .def_readwrite("R_y", &DiscretizationSpec::R_y)
        .def_readwrite("y_center", &DiscretizationSpec::y_center)
        .def_readwrite("L_x", &DiscretizationSpec::L_x)
        .def_readwrite("L_y", &DiscretizationSpec::L_y)
        .def_readwrite("base_cells_x", &DiscretizationSpec::base_cells_x)
        .def_readwrite("base_cells_y", &DiscretizationSpec::base_cells_y)
        .def_readwrite("mu", &DiscretizationSpec::mu)
        .def_readwrite("origin", &DiscretizationSpec::origin)
        .def_readwrite("lower_vol", &DiscretizationSpec::lower_vol)
        .def_readwrite("upper_vol", &DiscretizationSpec::upper_vol);

    py::class_<ThetaConfig>(m, "ThetaConfig")
        .def(py::init([](double theta, double T, int steps, int startup_steps) {
                 return ThetaConfig{theta, T, steps, startup_steps};
             }),
             py::arg("theta") = 0.5, py::arg("T") = 1.0, py::arg("steps") = 100, py::arg("startup_steps") = 2)
        .def_readwrite("theta", &ThetaConfig::theta)
        .def_readwrite("T", &ThetaConfig::T)
        .def_readwrite("steps", &ThetaConfig::steps)
        .def_readwrite("startup_steps", &ThetaConfig::startup_steps);

    py::class_<PriceSurface>(m, "PriceSurface")
        .def_readonly("x_nodes", &PriceSurface::x_nodes)
        .def_readonly("y_nodes", &PriceSurface::y_nodes)
        .def_property_readonly("values",
                               [](const PriceSurface& s) {
                                   const auto nx = static_cast<Eigen::Index>(s.x_nodes.size());
                                   const auto ny = static_cast<Eigen::Index>(s.y_nodes.size());
                                   using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
                                   return RowMat(Eigen::Map<const RowMat>(s.values.data(), nx, ny));
                               })
        .def_readonly("T", &PriceSurface::T)
        .def_readonly("spec", &PriceSurface::spec)
        .def_readonly("projection_error", &PriceSurface::projection_error)
        .def_readonly("warnings", &PriceSurface::warnings)
        .def("value_at", &PriceSurface::value_at, py::arg("x"), py::arg("y"))
        .def("point_price", &PriceSurface::point_price);

    py::class_<MassAtZeroResult>(m, "MassAtZeroResult")
        .def_readonly("estimate", &MassAtZeroResult::estimate)
        .def_readonly("eps", &MassAtZeroResult::eps)
        .def_readonly("values", &MassAtZeroResult::values)
        .def_readonly("warnings", &MassAtZeroResult::warnings);

    m.def(
        "price",
        [](const SabrParams& p, const std::string& payoff, double strike, const DiscretizationSpec& spec,
           const ThetaConfig& config) { return price_european(p, make_payoff(payoff, strike), spec, config); },
        py::arg("params"), py::arg("payoff") = "put", py::arg("strike") = 1.0,
        py::arg("spec") = DiscretizationSpec{}, py::arg("config") = ThetaConfig{0.5, 1.0, 100, 2},
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "price_barrier",
        [](const SabrParams& p, const std::string& payoff, double strike, double barrier,
           const DiscretizationSpec& spec, const ThetaConfig& config) {
            return sabrfem::price_barrier(p, make_payoff(payoff, strike), spec, config, barrier);
        },
        py::arg("params"), py::arg("payoff") = "put", py::arg("strike") = 1.0, py::arg("barrier") = 2.0,
        py::arg("spec") = DiscretizationSpec{}, py::arg("config") = ThetaConfig{0.5, 1.0, 100, 2},
        py::call_guard<py::gil_scoped_release>());
    m.def("mass_at_zero", &sabrfem::mass_at_zero, py::arg("params"), py::arg("T"), py::arg("spec"),
          py::arg("config"), py::arg("eps"), py::call_guard<py::gil_scoped_release>());

    m.def(
        "black_scholes_price",
        [](double sigma, double x0, double K, double T, const std::string& type) {
            return sabrfem::black_scholes_price(sigma, x0, K, T, option_type(type));
        },
        py::arg("sigma"), py::arg("x0"), py::arg("K"), py::arg("T"), py::arg("option") = "put");
    m.def(
        "cev_price",
        [](double sigma, double beta, double x0, double K, double T, const std::string& type) {
            return cev_exact_price(sigma, beta, x0, K, T, option_type(type));
        },
        py::arg("sigma"), py::arg("beta"), py::arg("x0"), py::arg("K"), py::arg("T"), py::arg("option") = "put");
    m.def("cev_absorption_probability", &sabrfem::cev_absorption_probability, py::arg("sigma"), py::arg("beta"),
          py::arg("x0"), py::arg("T"));
    m.def(
        "mc_price",
        [](const SabrParams& p, const std::string& payoff, double strike, double T, std::int64_t paths, int steps,
           std::uint64_t seed, int threads) {
            const Payoff f = make_payoff(payoff, strike);
            McConfig c;
            c.n_paths = paths;
            c.n_steps = steps;
            c.seed = seed;
            c.threads = threads;
            const McResult r = sabrfem::mc_price(p, [&f](double x) { return f(x); }, T, c);
            py::gil_scoped_acquire gil;
            py::dict d;
            d["mean"] = r.mean;
            d["stderr"] = r.stderr_;
            d["absorbed_fraction"] = r.absorbed_fraction;
            d["n_paths"] = r.n_paths;
            return d;
        },
        py::arg("params"), py::arg("payoff") = "put", py::arg("strike") = 1.0, py::arg("T") = 1.0,
        py::arg("paths") = 100000, py::arg("steps") = 1000, py::arg("seed") = 20240601, py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());

    m.def("preset_names", &preset_names);
    m.def(
        "preset_ini", [](const std::string& name) { return to_ini(preset(name)); }, py::arg("name"),
        "INI text of a named preset.");
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = sabrfem::run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line interface in-process; returns (exit code, stdout, stderr).");
}
