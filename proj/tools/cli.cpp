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
#include "epildp/model.hpp"
#include "epildp/nsfd.hpp"
#include "epildp/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace epildp
{
namespace cli
{
namespace
{

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* tool_version = "0.1.0";

class UsageError : public Error
{
public:
    explicit UsageError(const std::string& what)
        : Error("UsageError", what)
    {
    }
};

fs::path resolve_out(const std::string& flag)
{
    if (!flag.empty()) {
        return flag;
    }
    if (const char* env = std::getenv("EPILDP_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "epildp_out";
}

void write_json(const fs::path& path, const json& value)
{
    std::ofstream file(path);
    file << value.dump(2) << '\n';
    file.close();
    if (!file) {
        throw IoError("cannot write " + path.string());
    }
}

json read_json(const fs::path& path)
{
    std::ifstream file(path);
    if (!file) {
        throw IoError("cannot read " + path.string());
    }
    try {
        return json::parse(file);
    }
    catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

/// Output directory plus the manifest that describes one run.
class Run
{
public:
    Run(std::string command, fs::path dir, std::vector<std::string> argv)
        : m_dir(std::move(dir))
    {
        std::error_code ec;
        fs::create_directories(m_dir, ec);
        if (ec) {
            throw IoError("cannot create " + m_dir.string() + ": " + ec.message());
        }
        m_manifest["tool"]    = "epildp";
        m_manifest["version"] = tool_version;
        m_manifest["command"] = std::move(command);
        m_manifest["argv"]    = std::move(argv);
        m_manifest["outputs"] = json::array();
    }

    fs::path file(const std::string& name)
    {
        m_manifest["outputs"].push_back(name);
        return m_dir / name;
    }

    json& config()
    {
        return m_manifest["config"];
    }

    const fs::path& dir() const
    {
        return m_dir;
    }

    void finish(std::ostream& out)
    {
        write_json(m_dir / "manifest.json", m_manifest);
        for (const auto& name : m_manifest["outputs"]) {
            out << (m_dir / name.get<std::string>()).string() << '\n';
        }
    }

private:
    fs::path m_dir;
    json m_manifest;
};

json options_json(const CLI::App& app)
{
    json options = json::object();
    for (const CLI::Option* opt : app.get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help") {
            continue;
        }
        if (opt->get_type_size() == 0) {
            options[names.front()] = opt->count() > 0;
            continue;
        }
        if (opt->count() == 0) {
            options[names.front()] = opt->get_default_str();
            continue;
        }
        std::string joined;
        for (const auto& value : opt->results()) {
            joined += (joined.empty() ? "" : ",") + value;
        }
        options[names.front()] = joined;
    }
    for (const CLI::Option* opt : app.get_options()) {
        if (opt->get_positional() && opt->count() > 0) {
            options[opt->get_name()] = opt->results().front();
        }
    }
    return options;
}

json model_json(const CompartmentalModel& model)
{
    return {{"name", model.name()}, {"compartments", model.compartments()}, {"parameters", model.parameters()}};
}

json stats_json(const SimStats& stats)
{
    return {{"events", stats.events},
            {"ssa_steps", stats.ssa_steps},
            {"fallbacks", stats.fallbacks},
            {"leaps", stats.leaps},
            {"repairs", stats.repairs},
            {"repair_exhausted", stats.repair_exhausted},
            {"domain_violations", stats.domain_violations},
            {"seconds", stats.seconds}};
}

State default_x0(const CompartmentalModel& model)
{
    if (model.name() == "sis") {
        return {0.1};
    }
    if (model.name() == "siv" || model.name() == "siv_printed") {
        return {0.1, 0.2, 0.7};
    }
    throw ConfigError("--x0 is required for model '" + model.name() + "'");
}

State checked_x0(const CompartmentalModel& model, const std::vector<double>& given)
{
    State x0 = given.empty() ? default_x0(model) : State(given.begin(), given.end());
    if (x0.size() != model.dimension()) {
        throw ConfigError("--x0 needs " + std::to_string(model.dimension()) + " values");
    }
    if (!model.contains(x0)) {
        throw DomainError("initial state outside the model domain");
    }
    return x0;
}

PhiChoice parse_phi(const std::string& text)
{
    if (text == "exp") {
        return PhiChoice::one_minus_exp;
    }
    if (text == "rational") {
        return PhiChoice::rational;
    }
    throw ConfigError("unknown phi '" + text + "' (expected exp or rational)");
}

Trajectory exact_sis(const CompartmentalModel& model, const Trajectory& grid, double x0)
{
    if (model.name() != "sis") {
        throw ConfigError("the exact solution is only available for the SIS model");
    }
    const auto p = sis_parameters(model);
    Trajectory exact(1, TrajectorySource::exact);
    for (double t : grid.times) {
        const double z = sis_exact(x0, p.beta, p.gamma, t);
        exact.push_back(t, std::span<const double>(&z, 1));
    }
    return exact;
}

double sup_error(const Trajectory& a, const Trajectory& b)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        for (std::size_t i = 0; i < a.dimension; ++i) {
            const double e = std::abs(a.state(k)[i] - b.state(k)[i]);
            worst          = std::isfinite(e) ? std::max(worst, e) : std::numeric_limits<double>::infinity();
        }
    }
    return worst;
}

NSFDConfig nsfd_config(double h, double T, const State& x0, PhiChoice phi)
{
    NSFDConfig config;
    config.h       = h;
    config.horizon = T;
    config.initial = x0;
    config.phi     = phi;
    return config;
}

/// NSFD, explicit and exact trajectories on one grid plus the error table over halved steps.
void compare_schemes(Run& run, const CompartmentalModel& model, const State& x0, double h, double T, PhiChoice phi,
                     const std::string& prefix = "")
{
    const auto& names = model.compartments();
    const auto nsfd   = nsfd_integrate(model, nsfd_config(h, T, x0, phi));
    const auto euler  = explicit_integrate(model, h, T, x0);
    const auto exact  = exact_sis(model, nsfd, x0[0]);
    write_trajectory_csv(run.file(prefix + "nsfd.csv"), nsfd, names);
    write_trajectory_csv(run.file(prefix + "explicit.csv"), euler, names);
    write_trajectory_csv(run.file(prefix + "exact.csv"), exact, names);

    std::vector<std::vector<double>> rows;
    for (int k = 0; k < 5; ++k) {
        const double hk = h / std::ldexp(1.0, k);
        const auto a    = nsfd_integrate(model, nsfd_config(hk, T, x0, phi));
        const auto b    = explicit_integrate(model, hk, T, x0);
        const auto ref  = exact_sis(model, a, x0[0]);
        rows.push_back({hk, sup_error(a, ref), sup_error(b, ref)});
    }
    write_table_csv(run.file(prefix + "errors.csv"), {"h", "nsfd_error", "explicit_error"}, rows);
}

std::vector<double> boundary_lines(std::size_t count)
{
    std::vector<double> lines;
    for (std::size_t k = 0; k < count; ++k) {
        lines.push_back((static_cast<double>(k) + 0.5) / static_cast<double>(count));
    }
    return lines;
}

void write_boundary(Run& run, const CompartmentalModel& model, BoundaryConfig config)
{
    const auto points = characteristic_boundary(model, config);
    const auto& names = model.compartments();
    std::vector<std::vector<double>> rows;
    for (const auto& p : points) {
        rows.push_back({p.scan, p.line});
    }
    write_table_csv(run.file("boundary.csv"), {names[config.scan_coordinate], names[config.line_coordinate]}, rows);

    const auto search = find_equilibria(model, default_seeds(model));
    std::vector<std::string> header = names;
    header.insert(header.end(), {"stable", "endemic", "max_real_eigenvalue"});
    rows.clear();
    for (const auto& eq : search.equilibria) {
        std::vector<double> row = eq.point;
        double largest          = -std::numeric_limits<double>::infinity();
        for (const auto& lambda : eq.eigenvalues) {
            largest = std::max(largest, lambda.real());
        }
        row.push_back(eq.stability == Stability::stable ? 1.0 : 0.0);
        row.push_back(eq.kind == EquilibriumKind::endemic ? 1.0 : 0.0);
        row.push_back(largest);
        rows.push_back(std::move(row));
    }
    write_table_csv(run.file("equilibria.csv"), header, rows);
    run.config()["boundary_points"] = points.size();
}

void write_exit_result(Run& run, const CompartmentalModel& model, const ExitResult& result,
                       const std::string& suffix = "")
{
    std::vector<std::vector<double>> rows;
    for (const auto& [T, v] : result.table) {
        rows.push_back({T, v});
    }
    write_table_csv(run.file("convergence" + suffix + ".csv"), {"T", "v"}, rows);
    write_trajectory_csv(run.file("path" + suffix + ".csv"), result.path, model.compartments());
    json summary = {{"vbar", result.vbar}, {"converged", result.converged}, {"metadata", result.metadata}};
    write_json(run.file("vbar" + suffix + ".json"), summary);
}

struct SimOptions {
    std::int64_t population = 2000;
    double horizon          = 50.0;
    std::uint64_t seed      = 1;
    std::size_t replicates  = 1;
    std::string simulator   = "ssa";
    std::string variant     = "modified";
    double epsilon          = 0.03;
    std::int64_t nc         = 10;
    std::int64_t n          = 10;
    std::int64_t nbar       = 100;
    int halvings            = 20;
    std::string repair      = "resample";
    std::string tau_select  = "standard";
    double sample_dt        = -1.0;

    TauLeapConfig tau() const
    {
        TauLeapConfig config;
        config.epsilon      = epsilon;
        config.n_c          = nc;
        config.n            = n;
        config.n_bar        = nbar;
        config.max_halvings = halvings;
        config.variant      = parse_tau_variant(variant);
        config.repair       = parse_repair_mode(repair);
        config.tau_select   = parse_tau_selection(tau_select);
        config.validate();
        return config;
    }
};

SimulationResult simulate_one(const ScaledModel& scaled, SimulatorKind kind, const TauLeapConfig& tau,
                              const State& x0, double T, RngStream& rng, const Recording& recording)
{
    if (kind == SimulatorKind::ssa) {
        return ssa_direct(scaled, x0, T, rng, recording);
    }
    return epildp::tau_leap(scaled, x0, T, tau, rng, recording);
}

struct BenchRow {
    double ssa_seconds;
    double tau_seconds;
    SimStats ssa;
    SimStats tau;
};

BenchRow bench_once(const CompartmentalModel& model, std::int64_t N, double T, std::uint64_t seed, const State& x0)
{
    const ScaledModel scaled(model, N);
    const Recording sparse{T};
    BenchRow row{};
    RngStream a(seed, 0);
    auto start    = std::chrono::steady_clock::now();
    row.ssa       = ssa_direct(scaled, x0, T, a, sparse).stats;
    row.ssa_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    RngStream b(seed, 1);
    start           = std::chrono::steady_clock::now();
    row.tau         = tau_leap_modified(scaled, x0, T, TauLeapConfig{}, b, sparse).stats;
    row.tau_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

void write_bench(Run& run, const std::string& name, const CompartmentalModel& model, const std::vector<std::int64_t>& sizes,
                 double T, std::uint64_t seed, const State& x0)
{
    std::vector<std::vector<double>> rows;
    for (const auto N : sizes) {
        const auto r = bench_once(model, N, T, seed, x0);
        double events = 0.0;
        for (auto e : r.ssa.events) {
            events += static_cast<double>(e);
        }
        rows.push_back({static_cast<double>(N), T, r.ssa_seconds, r.tau_seconds, r.ssa_seconds / r.tau_seconds, events,
                        static_cast<double>(r.tau.leaps), static_cast<double>(r.tau.fallbacks)});
    }
    write_table_csv(run.file(name),
                    {"N", "T", "ssa_seconds", "tau_seconds", "speedup", "ssa_events", "tau_leaps", "tau_fallbacks"},
                    rows);
}

/// Single realisations at N = 2000 and 20000 next to the ODE limit, optionally with ensemble summaries.
void reproduce_paths(Run& run, const CompartmentalModel& model, const State& x0, SimulatorKind kind,
                     std::uint64_t seed, std::size_t replicates, unsigned threads)
{
    const double T     = 50.0;
    const auto& names  = model.compartments();
    const TauLeapConfig tau;
    write_trajectory_csv(run.file("ode.csv"), nsfd_integrate(model, nsfd_config(0.01, T, x0, PhiChoice::one_minus_exp)),
                         names);
    for (const std::int64_t N : {2000, 20000}) {
        const ScaledModel scaled(model, N);
        const std::string tag = "_N" + std::to_string(N);
        RngStream rng(seed, static_cast<std::uint64_t>(N));
        const auto result = simulate_one(scaled, kind, tau, x0, T, rng, Recording{0.05});
        write_trajectory_csv(run.file("path" + tag + ".csv"), result.path, names);
        if (replicates > 0) {
            SimulationSpec spec;
            spec.simulator       = kind;
            spec.x0              = x0;
            spec.horizon         = T;
            spec.sample_interval = 0.5;
            const auto summary   = ensemble_run(scaled, spec, replicates, seed, threads);
            write_summary_csv(run.file("summary" + tag + ".csv"), summary, names);
        }
    }
    run.config()["x0"]        = x0;
    run.config()["simulator"] = to_string(kind);
}

const std::vector<std::string>& reproduce_targets()
{
    static const std::vector<std::string> targets = {"fig2",   "fig3",   "fig4",     "fig5",    "fig6",
                                                     "fig7",   "fig8",   "fig9",     "table1",  "table2",
                                                     "vbar-sis", "vbar-siv"};
    return targets;
}

struct ReproduceOptions {
    std::string target;
    std::uint64_t seed     = 2026;
    std::size_t replicates = 0;
    double grid_dx         = 0.0;
    std::size_t lines      = 40;
};

void reproduce(Run& run, const ReproduceOptions& options, unsigned threads)
{
    const auto& target = options.target;
    run.config()["target"] = target;
    if (target == "fig2") {
        const auto model = make_sis({40.0, 20.0});
        compare_schemes(run, model, {0.3}, 0.1, 4.0, PhiChoice::one_minus_exp);
        // beta h = 1 with gamma h = 2 and gamma h = 4.
        for (const double gh : {2.0, 4.0}) {
            const auto side = make_sis({10.0, gh * 10.0});
            compare_schemes(run, side, {0.3}, 0.1, 4.0, PhiChoice::one_minus_exp,
                            "gamma" + std::to_string(static_cast<int>(gh)) + "h_");
        }
        run.config()["model"] = model_json(model);
    }
    else if (target == "fig3") {
        const auto model = make_siv();
        for (const double infected : {0.05, 0.2}) {
            const State x0   = siv_full_state(infected, 0.5);
            const auto path  = nsfd_integrate(model, nsfd_config(0.1, 600.0, x0, PhiChoice::one_minus_exp));
            std::ostringstream name;
            name << "nsfd_I" << infected << ".csv";
            write_trajectory_csv(run.file(name.str()), path, model.compartments());
        }
        run.config()["model"] = model_json(model);
    }
    else if (target == "fig4") {
        const auto model = make_siv();
        BoundaryConfig config;
        config.lines   = boundary_lines(options.lines);
        config.threads = threads;
        write_boundary(run, model, config);
        run.config()["model"] = model_json(model);
    }
    else if (target == "fig5") {
        const auto model = make_sis();
        const auto grid  = make_interval_grid(model, 0.01, 0.01);
        BellmanConfig config;
        config.steps       = 6000;
        config.checkpoints = {500, 1000, 2000, 4000, 6000};
        config.threads     = threads;
        const auto vfg     = bellman_backward(model, grid, config);
        std::vector<std::vector<double>> rows;
        for (const auto& [m, v] : vfg.convergence()) {
            rows.push_back({static_cast<double>(m) * grid.dt, v});
        }
        write_table_csv(run.file("convergence.csv"), {"T", "v"}, rows);
        for (const std::size_t steps : {500, 2000, 6000}) {
            const auto path = extract_trajectory(vfg, grid.start, steps);
            write_trajectory_csv(run.file("path_T" + std::to_string(steps / 100) + ".csv"), path, model.compartments());
        }
        run.config()["model"] = model_json(model);
    }
    else if (target == "fig6" || target == "fig7") {
        reproduce_paths(run, make_sis(), {0.1}, target == "fig6" ? SimulatorKind::ssa : SimulatorKind::tau_leap,
                        options.seed, options.replicates, threads);
    }
    else if (target == "fig8" || target == "fig9") {
        reproduce_paths(run, make_siv(), {0.1, 0.2, 0.7},
                        target == "fig8" ? SimulatorKind::ssa : SimulatorKind::tau_leap, options.seed,
                        options.replicates, threads);
    }
    else if (target == "table1") {
        write_bench(run, "bench_sis.csv", make_sis(), {2000, 20000, 200000}, 50.0, options.seed, {0.1});
    }
    else if (target == "table2") {
        write_bench(run, "bench_siv.csv", make_siv(), {2000, 20000, 200000}, 50.0, options.seed, {0.1, 0.2, 0.7});
    }
    else if (target == "vbar-sis") {
        VBarConfig config;
        config.threads = threads;
        write_exit_result(run, make_sis(), compute_vbar(make_sis(), config));
    }
    else if (target == "vbar-siv") {
        const auto model   = make_siv();
        const auto printed = make_siv({}, SivJumpTable::as_printed);
        VBarConfig config;
        config.dt        = 0.05;
        config.dx        = options.grid_dx > 0.0 ? options.grid_dx : 0.005;
        config.horizons  = {5.0, 10.0, 20.0};
        config.threads   = threads;
        config.cost_model = &printed;
        write_exit_result(run, model, compute_vbar(model, config));
        config.cost_model = nullptr;
        write_exit_result(run, model, compute_vbar(model, config), "_consistent");
        run.config()["grid_dx"] = config.dx;
    }
    else {
        throw ConfigError("unknown reproduce target '" + target + "'");
    }
}

std::vector<std::string> strip_out(const std::vector<std::string>& args)
{
    std::vector<std::string> kept;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--out") {
            ++k;
            continue;
        }
        if (args[k].rfind("--out=", 0) == 0) {
            continue;
        }
        kept.push_back(args[k]);
    }
    return kept;
}

void report(std::ostream& err, const std::string& category, const std::string& message)
{
    err << json{{"error", category}, {"message", message}}.dump() << '\n';
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

} // namespace

int exit_code(const std::string& category)
{
    static const std::map<std::string, int> codes = {
        {"UsageError", 2},     {"ConfigError", 2},    {"ParseError", 2},     {"NotBistable", 2},
        {"DomainError", 3},    {"BoundaryX", 3},      {"NoConvergence", 4},  {"SingularSystem", 4},
        {"Blowup", 4},         {"RepairExhausted", 4}, {"NonHyperbolic", 4}, {"IoError", 5},
    };
    const auto it = codes.find(category);
    return it == codes.end() ? 1 : it->second;
}

namespace
{

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth)
{
    CLI::App app{"Compartmental epidemic models: NSFD integration, stochastic simulation and exit costs", "epildp"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    std::string out_flag;
    unsigned threads = 1;
    std::string params;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_flag, "Output directory");
        sub->add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);
    };
    auto add_model = [&](CLI::App* sub, std::string& model_name) {
        sub->add_option("--model", model_name, "Built-in model (sis, siv, siv_printed) or model JSON file");
        sub->add_option("--params", params, "Parameter overrides k=v,k=v");
    };

    // ode
    auto* ode = app.add_subcommand("ode", "Integrate the deterministic limit");
    double ode_T = 10.0, ode_h = 0.1;
    std::vector<double> ode_x0;
    std::string ode_method = "nsfd", ode_phi = "exp";
    double ode_q = 0.0;
    bool ode_compare = false;
    std::string ode_model = "sis";
    add_model(ode, ode_model);
    ode->add_option("--T", ode_T, "Horizon")->check(CLI::PositiveNumber);
    ode->add_option("--h", ode_h, "Step size")->check(CLI::PositiveNumber);
    ode->add_option("--x0", ode_x0, "Initial state, comma separated")->delimiter(',');
    ode->add_option("--method", ode_method, "nsfd, explicit or exact");
    ode->add_option("--phi", ode_phi, "Denominator function: exp or rational");
    ode->add_option("--q", ode_q, "Denominator constant Q (0 derives it from the equilibria)");
    ode->add_flag("--compare", ode_compare, "Write all three schemes and the error table");
    add_common(ode);

    // boundary
    auto* boundary = app.add_subcommand("boundary", "Trace the boundary between the two basins of attraction");
    std::size_t lines = 40;
    int b_iterations  = 30;
    double b_h = 0.1, b_tol = 1e-4, b_tmax = 2000.0;
    std::size_t b_scan = 2, b_line = 1;
    std::string boundary_model = "siv";
    add_model(boundary, boundary_model);
    boundary->add_option("--lines", lines, "Number of scan lines")->check(CLI::PositiveNumber);
    boundary->add_option("--iterations", b_iterations, "Bisection steps per line");
    boundary->add_option("--h", b_h, "NSFD step used for classification");
    boundary->add_option("--tolerance", b_tol, "Distance counted as arrival at an equilibrium");
    boundary->add_option("--t-max", b_tmax, "Classification horizon");
    boundary->add_option("--scan", b_scan, "Coordinate bisected along each line");
    boundary->add_option("--line", b_line, "Coordinate held fixed on each line");
    add_common(boundary);

    // vbar
    auto* vbar = app.add_subcommand("vbar", "Exit cost from the stable endemic state by dynamic programming");
    VBarConfig vconf;
    std::string cost_model;
    std::string vbar_model = "sis";
    add_model(vbar, vbar_model);
    vbar->add_option("--grid-dt", vconf.dt, "Time step")->check(CLI::PositiveNumber);
    vbar->add_option("--grid-dx", vconf.dx, "Spatial step")->check(CLI::PositiveNumber);
    vbar->add_option("--grid-dx2", vconf.dx2, "Second spatial step for plane grids (0: same as --grid-dx)");
    vbar->add_option("--horizons", vconf.horizons, "Increasing horizons")->delimiter(',');
    vbar->add_option("--tolerance", vconf.tolerance, "Stop when consecutive horizons agree this well");
    vbar->add_option("--max-speed", vconf.max_speed, "Largest speed searched on plane grids");
    vbar->add_option("--refine", vconf.refine_iterations, "Golden-section iterations on interval grids");
    vbar->add_option("--cost-model", cost_model, "Model whose jump table defines the running cost");
    add_common(vbar);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Stochastic simulation of the population-N process");
    SimOptions sim;
    std::vector<double> sim_x0;
    std::string simulate_model = "sis";
    add_model(simulate, simulate_model);
    simulate->add_option("--N", sim.population, "Population size")->check(CLI::PositiveNumber);
    simulate->add_option("--T", sim.horizon, "Horizon")->check(CLI::PositiveNumber);
    simulate->add_option("--x0", sim_x0, "Initial proportions, comma separated")->delimiter(',');
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_option("--replicates", sim.replicates, "Number of paths; more than one writes a summary")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--simulator", sim.simulator, "ssa or tau_leap");
    simulate->add_option("--variant", sim.variant, "explicit, implicit, midpoint or modified");
    simulate->add_option("--epsilon", sim.epsilon, "Leap condition parameter");
    simulate->add_option("--nc", sim.nc, "Critical jump threshold");
    simulate->add_option("--n", sim.n, "SSA fallback threshold on a0 tau");
    simulate->add_option("--nbar", sim.nbar, "SSA steps per fallback burst");
    simulate->add_option("--max-halvings", sim.halvings, "Leap halvings before a burst");
    simulate->add_option("--repair", sim.repair, "resample or thinning");
    simulate->add_option("--tau-select", sim.tau_select, "standard or as_printed");
    simulate->add_option("--sample-dt", sim.sample_dt,
                         "Recording interval (0 records every change; default 0 for one path, 0.1 for ensembles)");
    add_common(simulate);

    // bench
    auto* bench = app.add_subcommand("bench", "Time SSA against modified tau-leaping");
    std::vector<std::int64_t> bench_sizes = {2000, 20000, 200000};
    std::vector<std::string> bench_models = {"sis", "siv"};
    double bench_T = 50.0;
    std::uint64_t bench_seed = 1;
    bench->add_option("--N", bench_sizes, "Population sizes")->delimiter(',');
    bench->add_option("--models", bench_models, "Built-in models")->delimiter(',');
    bench->add_option("--T", bench_T, "Horizon")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "Random seed");
    add_common(bench);

    // reproduce
    auto* repro = app.add_subcommand("reproduce", "Regenerate the data behind a published figure or table");
    ReproduceOptions ropts;
    repro->add_option("target", ropts.target, "fig2..fig9, table1, table2, vbar-sis or vbar-siv")
        ->required()
        ->check(CLI::IsMember(reproduce_targets()));
    repro->add_option("--seed", ropts.seed, "Random seed");
    repro->add_option("--replicates", ropts.replicates, "Ensemble size for fig6 to fig9 (0 skips the ensembles)");
    repro->add_option("--grid-dx", ropts.grid_dx, "Spatial step override for vbar-siv");
    repro->add_option("--lines", ropts.lines, "Scan lines for fig4")->check(CLI::PositiveNumber);
    add_common(repro);

    // replay
    auto* replay = app.add_subcommand("replay", "Run again from a manifest.json");
    std::string manifest_path;
    replay->add_option("manifest", manifest_path, "Manifest written by an earlier run")->required();
    replay->add_option("--out", out_flag, "Output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp& e) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 0;
    }
    catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    }
    catch (const CLI::CallForVersion& e) {
        out << tool_version << '\n';
        return 0;
    }
    catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    if (replay->parsed()) {
        if (depth > 0) {
            throw ConfigError("a manifest cannot replay another manifest");
        }
        const auto manifest = read_json(manifest_path);
        if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
            throw ParseError(manifest_path + ": no argv array");
        }
        auto argv = manifest["argv"].get<std::vector<std::string>>();
        argv.push_back("--out");
        argv.push_back(resolve_out(out_flag).string());
        return dispatch(argv, out, err, depth + 1);
    }

    CLI::App* sub = app.get_subcommands().front();
    const fs::path dir = sub == repro ? resolve_out(out_flag) / ropts.target : resolve_out(out_flag);
    Run run(sub->get_name(), dir, strip_out(args));
    run.config()["options"] = options_json(*sub);
    const auto overrides    = parse_overrides(params);

    if (sub == ode) {
        const auto model = resolve_model(ode_model, overrides);
        const State x0   = checked_x0(model, ode_x0);
        const auto phi   = parse_phi(ode_phi);
        run.config()["model"] = model_json(model);
        run.config()["x0"]    = x0;
        if (ode_compare) {
            compare_schemes(run, model, x0, ode_h, ode_T, phi);
        }
        else {
            Trajectory path;
            if (ode_method == "nsfd") {
                auto config = nsfd_config(ode_h, ode_T, x0, phi);
                if (ode_q > 0.0) {
                    config.q = ode_q;
                }
                path = nsfd_integrate(model, config);
            }
            else if (ode_method == "explicit") {
                path = explicit_integrate(model, ode_h, ode_T, x0);
            }
            else if (ode_method == "exact") {
                path = exact_sis(model, explicit_integrate(model, ode_h, ode_T, x0), x0[0]);
            }
            else {
                throw ConfigError("unknown method '" + ode_method + "'");
            }
            write_trajectory_csv(run.file("trajectory.csv"), path, model.compartments());
        }
    }
    else if (sub == boundary) {
        const auto model = resolve_model(boundary_model, overrides);
        BoundaryConfig config;
        config.lines           = boundary_lines(lines);
        config.iterations      = b_iterations;
        config.scan_coordinate = b_scan;
        config.line_coordinate = b_line;
        config.threads         = threads;
        config.classify.h         = b_h;
        config.classify.tolerance = b_tol;
        config.classify.t_max     = b_tmax;
        run.config()["model"] = model_json(model);
        write_boundary(run, model, config);
    }
    else if (sub == vbar) {
        const auto model = resolve_model(vbar_model, overrides);
        std::optional<CompartmentalModel> costs;
        if (!cost_model.empty()) {
            costs.emplace(resolve_model(cost_model, overrides));
            vconf.cost_model = &*costs;
        }
        vconf.threads          = threads;
        run.config()["model"] = model_json(model);
        write_exit_result(run, model, compute_vbar(model, vconf));
    }
    else if (sub == simulate) {
        const auto model  = resolve_model(simulate_model, overrides);
        const State x0    = checked_x0(model, sim_x0);
        const auto kind   = parse_simulator(sim.simulator);
        const auto tau    = sim.tau();
        const ScaledModel scaled(model, sim.population);
        run.config()["model"] = model_json(model);
        run.config()["x0"]    = x0;
        json stats;
        if (sim.replicates == 1) {
            RngStream rng(sim.seed, 0);
            const double dt   = sim.sample_dt < 0.0 ? 0.0 : sim.sample_dt;
            const auto result = simulate_one(scaled, kind, tau, x0, sim.horizon, rng, Recording{dt});
            write_trajectory_csv(run.file("trajectory.csv"), result.path, model.compartments());
            stats = stats_json(result.stats);
        }
        else {
            SimulationSpec spec;
            spec.simulator       = kind;
            spec.tau             = tau;
            spec.x0              = x0;
            spec.horizon         = sim.horizon;
            spec.sample_interval = sim.sample_dt < 0.0 ? 0.1 : sim.sample_dt;
            if (spec.sample_interval <= 0.0) {
                throw ConfigError("ensembles need a positive --sample-dt");
            }
            const auto summary = ensemble_run(scaled, spec, sim.replicates, sim.seed, threads);
            write_summary_csv(run.file("summary.csv"), summary, model.compartments());
            stats = stats_json(summary.stats);
        }
        write_json(run.file("stats.json"), stats);
    }
    else if (sub == bench) {
        for (const auto& name : bench_models) {
            const auto model = make_builtin(name);
            write_bench(run, "bench_" + name + ".csv", model, bench_sizes, bench_T, bench_seed, default_x0(model));
        }
    }
    else if (sub == repro) {
        reproduce(run, ropts, threads);
    }
    run.finish(out);
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    try {
        return dispatch(args, out, err, 0);
    }
    catch (const Error& e) {
        report(err, e.category(), e.what());
        return exit_code(e.category());
    }
    catch (const std::exception& e) {
        report(err, "InternalError", e.what());
        return 1;
    }
}

} // namespace cli
} // namespace epildp
