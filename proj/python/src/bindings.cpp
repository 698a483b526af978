/*
* Copyright (C) 2026 epildp contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#include "cli.hpp"

#include "epildp/dynamic_programming.hpp"
#include "epildp/io.hpp"
#include "epildp/lagrangian.hpp"
#include "epildp/model.hpp"
#include "epildp/nsfd.hpp"
#include "epildp/simulation.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace epildp;

namespace
{

py::array_t<double> to_array(const std::vector<double>& values)
{
    return py::array_t<double>(static_cast<py::ssize_t>(values.size()), values.data());
}

py::array_t<double> to_matrix(const std::vector<double>& values, std::size_t columns)
{
    const auto rows = static_cast<py::ssize_t>(columns == 0 ? 0 : values.size() / columns);
    py::array_t<double> out({rows, static_cast<py::ssize_t>(columns)});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

py::dict trajectory_dict(const Trajectory& path)
{
    py::dict d;
    d["t"]      = to_array(path.times);
    d["states"] = to_matrix(path.states, path.dimension);
    d["source"] = to_string(path.source);
    return d;
}

py::dict stats_dict(const SimStats& s)
{
    py::dict d;
    d["events"]            = s.events;
    d["ssa_steps"]         = s.ssa_steps;
    d["fallbacks"]         = s.fallbacks;
    d["leaps"]             = s.leaps;
    d["repairs"]           = s.repairs;
    d["repair_exhausted"]  = s.repair_exhausted;
    d["domain_violations"] = s.domain_violations;
    d["seconds"]           = s.seconds;
    return d;
}

PhiChoice phi_from(const std::string& name)
{
    if (name == "exp") {
        return PhiChoice::one_minus_exp;
    }
    if (name == "rational") {
        return PhiChoice::rational;
    }
    throw ConfigError("unknown phi '" + name + "'");
}

TauLeapConfig tau_config(const std::string& variant, double epsilon, std::int64_t nc, std::int64_t n,
                         std::int64_t nbar, const std::string& repair, const std::string& tau_select)
{
    TauLeapConfig config;
    config.variant    = parse_tau_variant(variant);
    config.epsilon    = epsilon;
    config.n_c        = nc;
    config.n          = n;
    config.n_bar      = nbar;
    config.repair     = parse_repair_mode(repair);
    config.tau_select = parse_tau_selection(tau_select);
    config.validate();
    return config;
}

} // namespace

PYBIND11_MODULE(_epildp, m)
{
    m.doc() = "Compartmental epidemic models: NSFD integration, stochastic simulation and exit costs";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<NoConvergence>(m, "NoConvergence", base.ptr());
    py::register_exception<NonHyperbolic>(m, "NonHyperbolic", base.ptr());
    py::register_exception<SingularSystem>(m, "SingularSystem", base.ptr());
    py::register_exception<Blowup>(m, "Blowup", base.ptr());
    py::register_exception<BoundaryX>(m, "BoundaryX", base.ptr());
    py::register_exception<NotBistable>(m, "NotBistable", base.ptr());
    py::register_exception<RepairExhausted>(m, "RepairExhausted", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<CompartmentalModel>(m, "Model")
        .def_property_readonly("name", &CompartmentalModel::name)
        .def_property_readonly("dimension", &CompartmentalModel::dimension)
        .def_property_readonly("jump_count", &CompartmentalModel::jump_count)
        .def_property_readonly("compartments", &CompartmentalModel::compartments)
        .def_property_readonly("parameters", &CompartmentalModel::parameters)
        .def("contains", [](const CompartmentalModel& model, const State& z) { return model.contains(z); })
        .def("rates", [](const CompartmentalModel& model, const State& z) { return model.rates(z); })
        .def("drift", [](const CompartmentalModel& model, const State& z) { return drift(model, z); })
        .def("to_json", &model_to_json)
        .def("__repr__", [](const CompartmentalModel& model) { return "<epildp.Model '" + model.name() + "'>"; });

    m.def("sis", [](double beta, double gamma) { return make_sis({beta, gamma}); }, py::arg("beta") = 1.5,
          py::arg("gamma") = 1.0);
    m.def(
        "siv",
        [](double beta, double gamma, double eta, double theta, double mu, double sigma, bool printed_table) {
            return make_siv({beta, gamma, eta, theta, mu, sigma},
                            printed_table ? SivJumpTable::as_printed : SivJumpTable::consistent);
        },
        py::arg("beta") = 3.6, py::arg("gamma") = 1.0, py::arg("eta") = 0.3, py::arg("theta") = 0.02,
        py::arg("mu") = 0.03, py::arg("sigma") = 0.1, py::arg("printed_table") = false);
    m.def("load_model", &resolve_model, py::arg("selector"), py::arg("overrides") = std::map<std::string, double>{},
          "Built-in model name or path to a model JSON file");
    m.def("parse_model", &parse_model_json, py::arg("text"), py::arg("overrides") = std::map<std::string, double>{});

    m.def(
        "find_equilibria",
        [](const CompartmentalModel& model) {
            py::list out;
            for (const auto& eq : find_equilibria(model, default_seeds(model)).equilibria) {
                py::dict d;
                d["point"]       = eq.point;
                d["stability"]   = to_string(eq.stability);
                d["kind"]        = to_string(eq.kind);
                d["eigenvalues"] = eq.eigenvalues;
                out.append(d);
            }
            return out;
        },
        py::arg("model"));
    m.def(
        "reproduction_numbers",
        [](const CompartmentalModel& model) {
            const auto r = basic_reproduction_number(siv_parameters(model));
            return py::make_tuple(r.r0, r.r0_without_vaccination);
        },
        py::arg("model"));

    m.def(
        "nsfd",
        [](const CompartmentalModel& model, const State& x0, double h, double T, const std::string& phi,
           std::optional<double> q) {
            NSFDConfig config;
            config.h       = h;
            config.horizon = T;
            config.initial = x0;
            config.phi     = phi_from(phi);
            config.q       = q;
            return trajectory_dict(nsfd_integrate(model, config));
        },
        py::arg("model"), py::arg("x0"), py::arg("h") = 0.1, py::arg("T") = 10.0, py::arg("phi") = "exp",
        py::arg("q") = py::none());
    m.def(
        "explicit_euler",
        [](const CompartmentalModel& model, const State& x0, double h, double T) {
            return trajectory_dict(explicit_integrate(model, h, T, x0));
        },
        py::arg("model"), py::arg("x0"), py::arg("h") = 0.1, py::arg("T") = 10.0);
    m.def(
        "sis_exact", [](double x, double beta, double gamma, double t) { return sis_exact(x, beta, gamma, t); },
        py::arg("x"), py::arg("beta"), py::arg("gamma"), py::arg("t"));

    m.def("lagrangian_sis", &lagrangian_sis, py::arg("x"), py::arg("y"), py::arg("beta"), py::arg("gamma"));
    m.def(
        "lagrangian",
        [](const CompartmentalModel& model, const State& x, const State& y) {
            const auto r = lagrangian_general(model, x, y);
            return py::make_tuple(r.value, r.mu);
        },
        py::arg("model"), py::arg("x"), py::arg("y"), "Cost of velocity y at x and the minimising jump intensities");

    m.def(
        "vbar",
        [](const CompartmentalModel& model, double dt, double dx, double dx2, std::vector<double> horizons,
           double tolerance, const CompartmentalModel* cost_model, unsigned threads) {
            VBarConfig config;
            config.dt         = dt;
            config.dx         = dx;
            config.dx2        = dx2;
            config.horizons   = std::move(horizons);
            config.tolerance  = tolerance;
            config.cost_model = cost_model;
            config.threads    = threads;
            ExitResult result;
            {
                py::gil_scoped_release release;
                result = compute_vbar(model, config);
            }
            py::dict d;
            d["vbar"]      = result.vbar;
            d["converged"] = result.converged;
            d["table"]     = result.table;
            d["path"]      = trajectory_dict(result.path);
            d["metadata"]  = result.metadata;
            return d;
        },
        py::arg("model"), py::arg("dt") = 0.01, py::arg("dx") = 0.01, py::arg("dx2") = 0.0,
        py::arg("horizons") = std::vector<double>{5.0, 10.0, 20.0, 40.0, 60.0}, py::arg("tolerance") = 1e-4,
        py::arg("cost_model") = nullptr, py::arg("threads") = 1u);

    m.def(
        "tau_select",
        [](const CompartmentalModel& model, std::int64_t N, const State& z, double epsilon) {
            return tau_select(ScaledModel(model, N), z, epsilon);
        },
        py::arg("model"), py::arg("N"), py::arg("z"), py::arg("epsilon") = 0.03);

    m.def(
        "simulate",
        [](const CompartmentalModel& model, std::int64_t N, const State& x0, double T, std::uint64_t seed,
           const std::string& simulator, const std::string& variant, double epsilon, std::int64_t nc, std::int64_t n,
           std::int64_t nbar, const std::string& repair, const std::string& tau_select, double sample_dt) {
            const ScaledModel scaled(model, N);
            const auto kind   = parse_simulator(simulator);
            const auto config = tau_config(variant, epsilon, nc, n, nbar, repair, tau_select);
            RngStream rng(seed, 0);
            SimulationResult result;
            {
                py::gil_scoped_release release;
                result = kind == SimulatorKind::ssa ? ssa_direct(scaled, x0, T, rng, Recording{sample_dt})
                                                    : tau_leap(scaled, x0, T, config, rng, Recording{sample_dt});
            }
            py::dict d = trajectory_dict(result.path);
            d["stats"] = stats_dict(result.stats);
            return d;
        },
        py::arg("model"), py::arg("N"), py::arg("x0"), py::arg("T") = 50.0, py::arg("seed") = 1,
        py::arg("simulator") = "ssa", py::arg("variant") = "modified", py::arg("epsilon") = 0.03, py::arg("nc") = 10,
        py::arg("n") = 10, py::arg("nbar") = 100, py::arg("repair") = "resample", py::arg("tau_select") = "standard",
        py::arg("sample_dt") = 0.0);

    m.def(
        "ensemble",
        [](const CompartmentalModel& model, std::int64_t N, const State& x0, std::size_t replicates, double T,
           std::uint64_t seed, const std::string& simulator, const std::string& variant, double epsilon,
           double sample_dt, unsigned threads) {
            SimulationSpec spec;
            spec.simulator       = parse_simulator(simulator);
            spec.tau             = tau_config(variant, epsilon, 10, 10, 100, "resample", "standard");
            spec.x0              = x0;
            spec.horizon         = T;
            spec.sample_interval = sample_dt;
            EnsembleSummary summary;
            {
                py::gil_scoped_release release;
                summary = ensemble_run(ScaledModel(model, N), spec, replicates, seed, threads);
            }
            py::dict d;
            d["t"]        = to_array(summary.times);
            d["mean"]     = to_matrix(summary.mean, summary.dimension);
            d["variance"] = to_matrix(summary.variance, summary.dimension);
            d["min"]      = to_matrix(summary.min, summary.dimension);
            d["max"]      = to_matrix(summary.max, summary.dimension);
            d["stats"]    = stats_dict(summary.stats);
            return d;
        },
        py::arg("model"), py::arg("N"), py::arg("x0"), py::arg("replicates"), py::arg("T") = 50.0,
        py::arg("seed") = 1, py::arg("simulator") = "ssa", py::arg("variant") = "modified", py::arg("epsilon") = 0.03,
        py::arg("sample_dt") = 0.1, py::arg("threads") = 1u);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line tool in-process; returns (exit code, stdout, stderr)");
}
