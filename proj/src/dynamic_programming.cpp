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
#include "epildp/dynamic_programming.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace epildp
{

namespace
{

/// Values kept for every step when the full table stays below this many entries.
constexpr std::size_t full_table_limit = 5'000'000;

std::string format_number(double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string format_state(std::span<const double> z)
{
    std::string out = "(";
    for (std::size_t i = 0; i < z.size(); ++i) {
        out += (i ? ", " : "") + format_number(z[i]);
    }
    return out + ")";
}

struct ExitPoints {
    State start;
    State target;
};

/// Stable endemic equilibrium and the exit target: the unstable equilibrium of the model.
/// With several unstable equilibria the endemic one is preferred.
ExitPoints exit_points(const CompartmentalModel& model)
{
    const auto equilibria = find_equilibria(model, default_seeds(model)).equilibria;
    const Equilibrium* start  = nullptr;
    const Equilibrium* target = nullptr;
    for (const auto& eq : equilibria) {
        if (eq.stability == Stability::stable && eq.kind == EquilibriumKind::endemic && !start) {
            start = &eq;
        }
        if (eq.stability == Stability::unstable) {
            if (!target || (target->kind == EquilibriumKind::disease_free && eq.kind == EquilibriumKind::endemic)) {
                target = &eq;
            }
        }
    }
    if (!start || !target) {
        throw NotBistable("exit problem needs a stable endemic and an unstable equilibrium");
    }
    return {start->point, target->point};
}

double interpolate(const std::vector<double>& values, double dx, double x)
{
    const double position = x / dx;
    const auto last       = values.size() - 1;
    if (position <= 0.0) {
        return values.front();
    }
    if (position >= static_cast<double>(last)) {
        return values.back();
    }
    const auto k   = static_cast<std::size_t>(position);
    const double t = position - static_cast<double>(k);
    if (t == 0.0) {
        return values[k];
    }
    if (std::isinf(values[k]) || std::isinf(values[k + 1])) {
        return infinite_cost;
    }
    return (1.0 - t) * values[k] + t * values[k + 1];
}

} // namespace

std::int64_t ControlGrid::node_at(int a, int b) const
{
    if (a < lattice_min[0] || a > lattice_max[0] || b < lattice_min[1] || b > lattice_max[1]) {
        return -1;
    }
    const auto width = static_cast<std::size_t>(lattice_max[0] - lattice_min[0] + 1);
    return lattice_index[static_cast<std::size_t>(b - lattice_min[1]) * width + static_cast<std::size_t>(a - lattice_min[0])];
}

std::size_t ControlGrid::nearest_node(std::span<const double> x) const
{
    if (kind == GridKind::interval) {
        const auto i = std::llround(x[0] / dx);
        return static_cast<std::size_t>(std::clamp<long long>(i, 0, static_cast<long long>(nodes.size()) - 1));
    }
    const double c0 = x[chart[0]] - origin[0];
    const double c1 = x[chart[1]] - origin[1];
    const int a     = static_cast<int>(std::lround((c0 * axis1[0] + c1 * axis1[1]) / dx1));
    const int b     = static_cast<int>(std::lround((c0 * axis2[0] + c1 * axis2[1]) / dx2));
    const auto node = node_at(a, b);
    if (node >= 0) {
        return static_cast<std::size_t>(node);
    }
    std::size_t best  = 0;
    double best_dist  = infinite_cost;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double dist = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            dist += (nodes[i][k] - x[k]) * (nodes[i][k] - x[k]);
        }
        if (dist < best_dist) {
            best_dist = dist;
            best      = i;
        }
    }
    return best;
}

ControlGrid make_interval_grid(const CompartmentalModel& model, double dt, double dx)
{
    if (model.dimension() != 1) {
        throw ConfigError("interval grids need a one-dimensional model");
    }
    if (!(dt > 0.0) || !(dx > 0.0) || dx > 1.0) {
        throw ConfigError("grid spacings must be positive");
    }
    const auto points = exit_points(model);
    const auto cells  = static_cast<std::size_t>(std::max(1L, std::lround(1.0 / dx)));

    ControlGrid grid;
    grid.kind = GridKind::interval;
    grid.dt   = dt;
    grid.dx   = 1.0 / static_cast<double>(cells);
    for (std::size_t i = 0; i <= cells; ++i) {
        grid.nodes.push_back({static_cast<double>(i) / static_cast<double>(cells)});
    }
    grid.start  = points.start;
    grid.target = grid.nearest_node(points.target);
    return grid;
}

ControlGrid make_plane_grid(const CompartmentalModel& model, double dt, double dx1, double dx2)
{
    if (model.dimension() != 3 || !model.dependent() || model.domain().sum != SumConstraint::equal_one) {
        throw ConfigError("plane grids need a three-compartment model on the simplex");
    }
    if (!(dt > 0.0) || !(dx1 > 0.0) || !(dx2 > 0.0)) {
        throw ConfigError("grid spacings must be positive");
    }
    const auto points = exit_points(model);
    const auto dep    = *model.dependent();

    ControlGrid grid;
    grid.kind = GridKind::plane;
    grid.dt   = dt;
    std::size_t slot = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        if (i != dep) {
            grid.chart[slot++] = i;
        }
    }
    grid.origin = {points.start[grid.chart[0]], points.start[grid.chart[1]]};
    const double u0     = points.target[grid.chart[0]] - grid.origin[0];
    const double u1     = points.target[grid.chart[1]] - grid.origin[1];
    const double length = std::hypot(u0, u1);
    const long steps    = std::max(1L, static_cast<long>(std::ceil(length / dx1 - 1e-9)));
    grid.axis1          = {u0 / length, u1 / length};
    grid.axis2          = {-grid.axis1[1], grid.axis1[0]};
    grid.dx1            = length / static_cast<double>(steps);
    grid.dx2            = dx2;

    // Lattice range from the projections of the simplex corners.
    const std::array<std::array<double, 2>, 3> corners = {{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
    std::array<double, 2> lo = {infinite_cost, infinite_cost};
    std::array<double, 2> hi = {-infinite_cost, -infinite_cost};
    for (const auto& c : corners) {
        const double p0 = c[0] - grid.origin[0];
        const double p1 = c[1] - grid.origin[1];
        const double a  = (p0 * grid.axis1[0] + p1 * grid.axis1[1]) / grid.dx1;
        const double b  = (p0 * grid.axis2[0] + p1 * grid.axis2[1]) / grid.dx2;
        lo              = {std::min(lo[0], a), std::min(lo[1], b)};
        hi              = {std::max(hi[0], a), std::max(hi[1], b)};
    }
    grid.lattice_min = {static_cast<int>(std::floor(lo[0])), static_cast<int>(std::floor(lo[1]))};
    grid.lattice_max = {static_cast<int>(std::ceil(hi[0])), static_cast<int>(std::ceil(hi[1]))};
    const auto width  = static_cast<std::size_t>(grid.lattice_max[0] - grid.lattice_min[0] + 1);
    const auto height = static_cast<std::size_t>(grid.lattice_max[1] - grid.lattice_min[1] + 1);
    grid.lattice_index.assign(width * height, -1);

    constexpr double slack = 1e-12;
    for (int b = grid.lattice_min[1]; b <= grid.lattice_max[1]; ++b) {
        for (int a = grid.lattice_min[0]; a <= grid.lattice_max[0]; ++a) {
            double c0 = grid.origin[0] + a * grid.dx1 * grid.axis1[0] + b * grid.dx2 * grid.axis2[0];
            double c1 = grid.origin[1] + a * grid.dx1 * grid.axis1[1] + b * grid.dx2 * grid.axis2[1];
            if (c0 < -slack || c1 < -slack || c0 + c1 > 1.0 + slack) {
                continue;
            }
            c0 = std::clamp(c0, 0.0, 1.0);
            c1 = std::clamp(c1, 0.0, 1.0 - c0);
            State z(3);
            z[grid.chart[0]] = c0;
            z[grid.chart[1]] = c1;
            z[dep]           = std::max(0.0, 1.0 - c0 - c1);
            grid.lattice_index[static_cast<std::size_t>(b - grid.lattice_min[1]) * width +
                               static_cast<std::size_t>(a - grid.lattice_min[0])] =
                static_cast<std::int64_t>(grid.nodes.size());
            grid.nodes.push_back(std::move(z));
            grid.lattice.push_back({a, b});
        }
    }
    // The lattice passes through the start (a = b = 0) and the target (a = steps, b = 0) by construction.
    grid.start       = points.start;
    grid.nodes[static_cast<std::size_t>(grid.node_at(0, 0))] = points.start;
    const auto target = grid.node_at(static_cast<int>(steps), 0);
    if (target < 0) {
        throw ConfigError("exit target is not a grid node");
    }
    grid.target                                   = static_cast<std::size_t>(target);
    grid.nodes[grid.target]                       = points.target;
    return grid;
}

double terminal_cost(const CompartmentalModel& model, const ControlGrid& grid, std::size_t node)
{
    const auto& x      = grid.nodes[node];
    const auto& target = grid.nodes[grid.target];
    State y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = (target[i] - x[i]) / grid.dt;
    }
    return grid.dt * LagrangianEvaluator(model)(x, y);
}

double ValueFunctionGrid::value(std::size_t m, std::size_t node) const
{
    return values(m).at(node);
}

const std::vector<double>& ValueFunctionGrid::values(std::size_t m) const
{
    auto it = m_values.find(m);
    if (it == m_values.end()) {
        throw ConfigError("value slice " + std::to_string(m) + " was not stored");
    }
    return it->second;
}

double ValueFunctionGrid::value_at(std::size_t m, std::span<const double> x) const
{
    const auto& slice = values(m);
    if (m_grid.kind == GridKind::interval) {
        return interpolate(slice, m_grid.dx, x[0]);
    }
    return slice[m_grid.nearest_node(x)];
}

State ValueFunctionGrid::destination(std::size_t m, std::size_t node) const
{
    if (m == 0 || m > m_steps) {
        throw ConfigError("no control for " + std::to_string(m) + " steps to go");
    }
    const std::size_t P = m_grid.size();
    if (m == 1) {
        return m_grid.nodes[m_grid.target];
    }
    if (m_grid.kind == GridKind::interval) {
        return {m_destinations[(m - 1) * P + node]};
    }
    return m_grid.nodes[m_candidates[node][m_codes[(m - 1) * P + node]]];
}

ValueFunctionGrid bellman_backward(const CompartmentalModel& model, const ControlGrid& grid,
                                   const BellmanConfig& config)
{
    if (config.steps == 0) {
        throw ConfigError("dynamic programming needs at least one step");
    }
    const std::size_t P = grid.size();
    const double dt     = grid.dt;
    const bool keep_all = (config.steps + 1) * P <= full_table_limit;

    std::vector<std::size_t> checkpoints = config.checkpoints;
    checkpoints.push_back(config.steps);
    std::sort(checkpoints.begin(), checkpoints.end());
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
    checkpoints.erase(std::remove_if(checkpoints.begin(), checkpoints.end(),
                                     [&](std::size_t m) {
                                         return m == 0 || m > config.steps;
                                     }),
                      checkpoints.end());

    ValueFunctionGrid vfg;
    vfg.m_grid = grid;

    std::vector<double> current(P);
    details::parallel_for(P, config.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            current[i] = terminal_cost(model, grid, i);
        }
    });
    current[grid.target] = 0.0;

    // Plane grids: per node, candidate destinations sorted by one-step cost.
    std::vector<std::vector<double>> costs;
    std::vector<double> pair_costs;
    const LagrangianEvaluator cost(model);
    if (grid.kind == GridKind::plane) {
        const int radius = std::max(
            1, static_cast<int>(std::ceil(config.max_speed * dt / std::min(grid.dx1, grid.dx2) - 1e-9)));
        vfg.m_candidates.resize(P);
        costs.resize(P);
        details::parallel_for(P, config.threads, [&](std::size_t begin, std::size_t end) {
            State y(3);
            std::vector<std::pair<double, std::uint32_t>> list;
            for (std::size_t i = begin; i < end; ++i) {
                const auto& x = grid.nodes[i];
                const LocalLagrangian local(model, x);
                list.clear();
                bool has_target = false;
                for (int db = -radius; db <= radius; ++db) {
                    for (int da = -radius; da <= radius; ++da) {
                        const auto j = grid.node_at(grid.lattice[i][0] + da, grid.lattice[i][1] + db);
                        if (j < 0) {
                            continue;
                        }
                        const auto& xp = grid.nodes[static_cast<std::size_t>(j)];
                        for (std::size_t k = 0; k < 3; ++k) {
                            y[k] = (xp[k] - x[k]) / dt;
                        }
                        const double c = dt * local.value(y);
                        if (std::isfinite(c)) {
                            list.emplace_back(c, static_cast<std::uint32_t>(j));
                        }
                        has_target = has_target || static_cast<std::size_t>(j) == grid.target;
                    }
                }
                if (!has_target && std::isfinite(current[i])) {
                    list.emplace_back(current[i], static_cast<std::uint32_t>(grid.target));
                }
                std::sort(list.begin(), list.end());
                for (const auto& [c, j] : list) {
                    costs[i].push_back(c);
                    vfg.m_candidates[i].push_back(j);
                }
            }
        });
    }
    else {
        pair_costs.resize(P * P);
        details::parallel_for(P, config.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                for (std::size_t j = 0; j < P; ++j) {
                    const double y    = (grid.nodes[j][0] - grid.nodes[i][0]) / dt;
                    pair_costs[i * P + j] = dt * cost(grid.nodes[i], std::span<const double>(&y, 1));
                }
            }
        });
    }

    auto record = [&](std::size_t m, const std::vector<double>& slice) {
        const bool checkpoint = std::binary_search(checkpoints.begin(), checkpoints.end(), m);
        if (keep_all || checkpoint) {
            vfg.m_values[m] = slice;
        }
        if (checkpoint) {
            const double probe =
                grid.kind == GridKind::interval ? interpolate(slice, grid.dx, grid.start[0]) : slice[grid.nearest_node(grid.start)];
            vfg.m_convergence.emplace_back(m, probe);
        }
        return checkpoint;
    };

    // m = 1: jump straight to the target; no control is stored.
    vfg.m_steps = 1;
    if (grid.kind == GridKind::interval) {
        vfg.m_destinations.assign(P, grid.nodes[grid.target][0]);
    }
    else {
        vfg.m_codes.assign(P, 0);
    }
    record(1, current);

    std::vector<double> next(P);
    std::vector<double> slice_dest(grid.kind == GridKind::interval ? P : 0);
    std::vector<std::uint16_t> slice_codes(grid.kind == GridKind::plane ? P : 0);

    for (std::size_t m = 2; m <= config.steps; ++m) {
        if (grid.kind == GridKind::interval) {
            details::parallel_for(P, config.threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    const double x = grid.nodes[i][0];
                    double best    = infinite_cost;
                    std::size_t j_best = i;
                    for (std::size_t j = 0; j < P; ++j) {
                        const double v = pair_costs[i * P + j] + current[j];
                        if (v < best) {
                            best   = v;
                            j_best = j;
                        }
                    }
                    double dest = grid.nodes[j_best][0];
                    // On each neighbouring cell the interpolated value is affine and the cost convex.
                    auto objective = [&](double xp) {
                        const double y = (xp - x) / dt;
                        return dt * cost(grid.nodes[i], std::span<const double>(&y, 1)) +
                               interpolate(current, grid.dx, xp);
                    };
                    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
                    for (int side : {-1, 1}) {
                        const auto neighbour = static_cast<long>(j_best) + side;
                        if (neighbour < 0 || neighbour >= static_cast<long>(P) || !std::isfinite(best)) {
                            continue;
                        }
                        double a  = std::min(grid.nodes[j_best][0], grid.nodes[static_cast<std::size_t>(neighbour)][0]);
                        double b  = std::max(grid.nodes[j_best][0], grid.nodes[static_cast<std::size_t>(neighbour)][0]);
                        double c  = b - ratio * (b - a);
                        double d  = a + ratio * (b - a);
                        double fc = objective(c);
                        double fd = objective(d);
                        for (int it = 0; it < config.refine_iterations; ++it) {
                            if (fc < best) {
                                best = fc;
                                dest = c;
                            }
                            if (fd < best) {
                                best = fd;
                                dest = d;
                            }
                            if (fc < fd) {
                                b  = d;
                                d  = c;
                                fd = fc;
                                c  = b - ratio * (b - a);
                                fc = objective(c);
                            }
                            else {
                                a  = c;
                                c  = d;
                                fc = fd;
                                d  = a + ratio * (b - a);
                                fd = objective(d);
                            }
                        }
                        for (double cand : {c, d}) {
                            const double v = objective(cand);
                            if (v < best) {
                                best = v;
                                dest = cand;
                            }
                        }
                    }
                    next[i]       = best;
                    slice_dest[i] = dest;
                }
            });
            vfg.m_destinations.insert(vfg.m_destinations.end(), slice_dest.begin(), slice_dest.end());
        }
        else {
            details::parallel_for(P, config.threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t i = begin; i < end; ++i) {
                    const auto& c    = costs[i];
                    const auto& dest = vfg.m_candidates[i];
                    double best      = infinite_cost;
                    std::uint16_t code = 0;
                    for (std::size_t k = 0; k < c.size(); ++k) {
                        // Values are nonnegative, so no later candidate can win.
                        if (c[k] >= best) {
                            break;
                        }
                        const double v = c[k] + current[dest[k]];
                        if (v < best) {
                            best = v;
                            code = static_cast<std::uint16_t>(k);
                        }
                    }
                    next[i]        = best;
                    slice_codes[i] = code;
                }
            });
            vfg.m_codes.insert(vfg.m_codes.end(), slice_codes.begin(), slice_codes.end());
        }
        next[grid.target] = std::min(next[grid.target], 0.0);
        std::swap(current, next);
        vfg.m_steps = m;
        if (record(m, current) && config.stop_tolerance > 0.0 && vfg.m_convergence.size() >= 2) {
            const auto& conv = vfg.m_convergence;
            if (std::abs(conv.back().second - conv[conv.size() - 2].second) < config.stop_tolerance) {
                break;
            }
        }
    }
    if (!vfg.has_values(vfg.m_steps)) {
        vfg.m_values[vfg.m_steps] = current;
    }
    return vfg;
}

Trajectory extract_trajectory(const ValueFunctionGrid& vfg, std::span<const double> start)
{
    return extract_trajectory(vfg, start, vfg.steps());
}

Trajectory extract_trajectory(const ValueFunctionGrid& vfg, std::span<const double> start, std::size_t steps)
{
    if (steps == 0 || steps > vfg.steps()) {
        throw ConfigError("trajectory horizon exceeds the computed value function");
    }
    const auto& grid = vfg.grid();
    Trajectory path(start.size(), TrajectorySource::optimal_control);
    State z(start.begin(), start.end());
    path.push_back(0.0, z);
    if (grid.kind == GridKind::interval) {
        const std::size_t P = grid.size();
        for (std::size_t m = steps; m >= 1; --m) {
            // Linear interpolation of the control between the two surrounding nodes.
            const double position = std::clamp(z[0] / grid.dx, 0.0, static_cast<double>(P - 1));
            const auto k          = std::min(static_cast<std::size_t>(position), P - 2);
            const double t        = position - static_cast<double>(k);
            const double a0       = (vfg.destination(m, k)[0] - grid.nodes[k][0]) / grid.dt;
            const double a1       = (vfg.destination(m, k + 1)[0] - grid.nodes[k + 1][0]) / grid.dt;
            z[0]                  = std::clamp(z[0] + ((1.0 - t) * a0 + t * a1) * grid.dt, 0.0, 1.0);
            path.push_back(static_cast<double>(steps - m + 1) * grid.dt, z);
        }
        return path;
    }
    std::size_t node = grid.nearest_node(start);
    for (std::size_t m = steps; m >= 1; --m) {
        const auto next = vfg.destination(m, node);
        node            = grid.nearest_node(next);
        path.push_back(static_cast<double>(steps - m + 1) * grid.dt, next);
    }
    return path;
}

ExitResult compute_vbar(const CompartmentalModel& model, const VBarConfig& config)
{
    if (config.horizons.empty()) {
        throw ConfigError("horizon schedule is empty");
    }
    if (!std::is_sorted(config.horizons.begin(), config.horizons.end())) {
        throw ConfigError("horizon schedule must be increasing");
    }
    const double dx2 = config.dx2 > 0.0 ? config.dx2 : config.dx;
    const ControlGrid grid = model.dimension() == 1 ? make_interval_grid(model, config.dt, config.dx)
                                                    : make_plane_grid(model, config.dt, config.dx, dx2);

    BellmanConfig bellman;
    for (double T : config.horizons) {
        const auto steps = std::llround(T / config.dt);
        if (steps < 1 || std::abs(static_cast<double>(steps) * config.dt - T) > 1e-9 * std::max(1.0, T)) {
            throw ConfigError("horizon " + format_number(T) + " is not a multiple of the time step");
        }
        bellman.checkpoints.push_back(static_cast<std::size_t>(steps));
    }
    bellman.steps             = bellman.checkpoints.back();
    bellman.stop_tolerance    = config.tolerance;
    bellman.refine_iterations = config.refine_iterations;
    bellman.max_speed         = config.max_speed;
    bellman.threads           = config.threads;

    const auto& costs = config.cost_model ? *config.cost_model : model;
    if (costs.dimension() != model.dimension()) {
        throw ConfigError("cost model has a different dimension");
    }
    const auto vfg = bellman_backward(costs, grid, bellman);

    ExitResult result;
    for (const auto& [m, value] : vfg.convergence()) {
        result.table.emplace_back(static_cast<double>(m) * config.dt, value);
    }
    result.vbar = result.table.back().second;
    result.converged =
        result.table.size() >= 2 &&
        std::abs(result.table.back().second - result.table[result.table.size() - 2].second) < config.tolerance;
    result.path = extract_trajectory(vfg, grid.start);

    auto& meta           = result.metadata;
    meta["model"]        = model.name();
    meta["cost_model"]   = costs.name();
    meta["grid"]         = grid.kind == GridKind::interval ? "interval" : "plane";
    meta["dt"]           = format_number(config.dt);
    meta["nodes"]        = std::to_string(grid.size());
    meta["start"]        = format_state(grid.start);
    meta["target"]       = format_state(grid.nodes[grid.target]);
    meta["steps"]        = std::to_string(vfg.steps());
    meta["tolerance"]    = format_number(config.tolerance);
    meta["path_end"]     = format_state(result.path.back());
    if (grid.kind == GridKind::interval) {
        meta["dx"]         = format_number(grid.dx);
        meta["refinement"] = "golden section, " + std::to_string(config.refine_iterations) + " iterations per cell";
    }
    else {
        meta["dx1"]        = format_number(grid.dx1);
        meta["dx2"]        = format_number(grid.dx2);
        meta["max_speed"]  = format_number(config.max_speed);
        meta["assumption"] = "exit target fixed to the unstable endemic equilibrium; destinations restricted to "
                             "grid nodes, so the value is an upper bound";
    }
    return result;
}

namespace
{

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tolerance, int depth)
{
    const double m   = 0.5 * (a + b);
    const double lm  = 0.5 * (a + m);
    const double rm  = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left  = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tolerance) {
        return left + right + delta / 15.0;
    }
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tolerance, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tolerance, depth - 1);
}

} // namespace

double quasipotential_1d_oracle(const std::function<double(double)>& up, const std::function<double(double)>& down,
                                double lower, double upper, double tolerance)
{
    if (!(upper > lower)) {
        throw ConfigError("quadrature interval is empty");
    }
    const double nudge = 1e-12 * (upper - lower);
    const double a     = lower + nudge;
    const double b     = upper - nudge;
    const std::function<double(double)> f = [&](double x) {
        return std::log(up(x) / down(x));
    };
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tolerance, 50);
}

} // namespace epildp
