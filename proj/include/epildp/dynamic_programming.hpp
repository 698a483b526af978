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
#ifndef EPILDP_DYNAMIC_PROGRAMMING_HPP
#define EPILDP_DYNAMIC_PROGRAMMING_HPP

#include "epildp/lagrangian.hpp"
#include "epildp/model.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace epildp
{

enum class GridKind
{
    interval, ///< uniform grid of [0, 1], destinations refined between nodes
    plane,    ///< rotated lattice in the free coordinates of a simplex model, destinations on nodes only
};

/// Time discretisation and spatial grid of the discrete control problem.
struct ControlGrid {
    GridKind kind = GridKind::interval;
    double dt     = 0.01;
    std::vector<State> nodes;
    /// Node where the optimal path must end (the exit target).
    std::size_t target = 0;
    /// Stable equilibrium the exit starts from; not necessarily a node.
    State start;

    /// Interval grid: node i sits at i * dx.
    double dx = 0.0;

    /// Plane grid: node = origin + a dx1 e1 + b dx2 e2 in the free coordinates.
    double dx1 = 0.0;
    double dx2 = 0.0;
    std::array<double, 2> axis1{};
    std::array<double, 2> axis2{};
    std::array<std::size_t, 2> chart{};
    std::array<double, 2> origin{};
    /// Lattice coordinates (a, b) of every node.
    std::vector<std::array<int, 2>> lattice;
    std::array<int, 2> lattice_min{};
    std::array<int, 2> lattice_max{};
    /// Node index per lattice cell, row-major over b then a; -1 outside the domain.
    std::vector<std::int64_t> lattice_index;

    std::size_t size() const
    {
        return nodes.size();
    }
    /// Node at lattice coordinates (a, b), or -1.
    std::int64_t node_at(int a, int b) const;
    /// Node closest to x (interval grids: rounding of x / dx).
    std::size_t nearest_node(std::span<const double> x) const;
};

/// Uniform grid of [0, 1] with spacing 1/round(1/dx); target 0, start at the endemic equilibrium.
ControlGrid make_interval_grid(const CompartmentalModel& model, double dt, double dx);

/// Rotated lattice with origin at the stable endemic equilibrium and first axis through the
/// unstable endemic equilibrium (the target). dx1 is shrunk slightly so the target is a node.
ControlGrid make_plane_grid(const CompartmentalModel& model, double dt, double dx1, double dx2);

/// Cost of reaching the target from node i in one step: dt * L(x, (target - x) / dt).
double terminal_cost(const CompartmentalModel& model, const ControlGrid& grid, std::size_t node);

struct BellmanConfig {
    /// Largest number of steps to go.
    std::size_t steps = 0;
    /// Step counts at which the full value slice is kept (the largest is always kept).
    std::vector<std::size_t> checkpoints;
    /// Stop after a checkpoint whose value at grid.start differs by less than this from the
    /// previous checkpoint. Zero disables early stopping.
    double stop_tolerance = 0.0;
    /// Interval grids: golden-section iterations per neighbouring cell.
    int refine_iterations = 20;
    /// Plane grids: destinations are limited to a window of this speed (state units per time).
    double max_speed = 1.0;
    unsigned threads = 1;
};

/// Value function with m steps to go, W_m(x) = v^{m dt}(0, x), and the argmin controls.
/// By time homogeneity v^{T}(t_j, x) = W_{n-j}(x) with n = T / dt.
class ValueFunctionGrid
{
public:
    const ControlGrid& grid() const
    {
        return m_grid;
    }
    /// Largest number of steps actually computed.
    std::size_t steps() const
    {
        return m_steps;
    }
    bool has_values(std::size_t m) const
    {
        return m_values.count(m) > 0;
    }
    /// W_m at node i; throws ConfigError if slice m was not kept.
    double value(std::size_t m, std::size_t node) const;
    const std::vector<double>& values(std::size_t m) const;
    /// W_m at an arbitrary state (linear interpolation on interval grids, nearest node on plane grids).
    double value_at(std::size_t m, std::span<const double> x) const;
    /// Optimal next state from node i with m steps to go.
    State destination(std::size_t m, std::size_t node) const;
    /// Stored step counts with their value at grid().start.
    const std::vector<std::pair<std::size_t, double>>& convergence() const
    {
        return m_convergence;
    }

private:
    friend ValueFunctionGrid bellman_backward(const CompartmentalModel&, const ControlGrid&, const BellmanConfig&);

    ControlGrid m_grid;
    std::size_t m_steps = 0;
    std::map<std::size_t, std::vector<double>> m_values;
    std::vector<std::pair<std::size_t, double>> m_convergence;
    /// Interval grids: destination state per (m - 1, node).
    std::vector<double> m_destinations;
    /// Plane grids: index into the node's candidate list per (m - 1, node).
    std::vector<std::uint16_t> m_codes;
    std::vector<std::vector<std::uint32_t>> m_candidates;
};

/// Backward Bellman recursion W_m(x) = min_x' dt L(x, (x' - x)/dt) + W_{m-1}(x') from
/// W_1 = terminal cost. Unreachable states hold +inf.
ValueFunctionGrid bellman_backward(const CompartmentalModel& model, const ControlGrid& grid,
                                   const BellmanConfig& config);

/// Forward pass from start applying the optimal controls with steps() steps to go.
Trajectory extract_trajectory(const ValueFunctionGrid& vfg, std::span<const double> start);
/// Same for a shorter horizon of the given number of steps (at most steps()).
Trajectory extract_trajectory(const ValueFunctionGrid& vfg, std::span<const double> start, std::size_t steps);

struct VBarConfig {
    double dt = 0.01;
    double dx = 0.01;
    /// Second spacing for plane grids; defaults to dx when zero.
    double dx2 = 0.0;
    /// Increasing horizons; the run stops once consecutive values differ by less than tolerance.
    std::vector<double> horizons = {5.0, 10.0, 20.0, 40.0, 60.0};
    double tolerance = 1e-4;
    int refine_iterations = 20;
    double max_speed = 1.0;
    unsigned threads = 1;
    /// Jump model used for the running cost; the grid, start and target always come from the
    /// model passed to compute_vbar. Defaults to that model.
    const CompartmentalModel* cost_model = nullptr;
};

struct ExitResult {
    double vbar = infinite_cost;
    bool converged = false;
    /// (horizon, v^T(0, x*)) for each horizon evaluated.
    std::vector<std::pair<double, double>> table;
    Trajectory path;
    std::map<std::string, std::string> metadata;
};

/// Exit cost from the stable endemic equilibrium by dynamic programming over increasing horizons.
ExitResult compute_vbar(const CompartmentalModel& model, const VBarConfig& config);

/// Integral of log(up(x) / down(x)) over [lower, upper] by adaptive Simpson quadrature;
/// the endpoints are moved inside by a relative 1e-12 so 0/0 limits are avoided.
double quasipotential_1d_oracle(const std::function<double(double)>& up, const std::function<double(double)>& down,
                                double lower, double upper, double tolerance = 1e-12);

} // namespace epildp

#endif // EPILDP_DYNAMIC_PROGRAMMING_HPP
