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

#include <gtest/gtest.h>

#include <cmath>

namespace
{

using namespace epildp;

// Exit cost of the SIS model in closed form: integral of log(beta (1 - x) / gamma) over [0, x*].
double sis_quasipotential(double beta, double gamma)
{
    const double a = 1.0 - gamma / beta;
    return a * std::log(beta / gamma) - (1.0 - a) * std::log(1.0 - a) - a;
}

TEST(QuasipotentialOracle, MatchesClosedForm)
{
    for (const auto& [beta, gamma] : {std::pair{1.5, 1.0}, {3.0, 1.0}, {2.0, 1.5}, {10.0, 1.0}}) {
        const double value = quasipotential_1d_oracle(
            [&](double x) {
                return beta * x * (1.0 - x);
            },
            [&](double x) {
                return gamma * x;
            },
            0.0, 1.0 - gamma / beta);
        EXPECT_NEAR(value, sis_quasipotential(beta, gamma), 1e-10) << beta << " " << gamma;
    }
    EXPECT_NEAR(sis_quasipotential(1.5, 1.0), std::log(1.5) - 1.0 / 3.0, 1e-15);
}

TEST(IntervalGrid, Layout)
{
    const auto grid = make_interval_grid(make_sis(), 0.01, 0.01);
    EXPECT_EQ(grid.size(), 101u);
    EXPECT_EQ(grid.target, 0u);
    EXPECT_NEAR(grid.start[0], 1.0 / 3.0, 1e-12);
    EXPECT_THROW(make_interval_grid(make_sis(), 0.0, 0.01), ConfigError);
    EXPECT_THROW(make_interval_grid(make_sis(), 0.01, -1.0), ConfigError);
    EXPECT_THROW(make_interval_grid(make_siv(), 0.01, 0.01), ConfigError);
    EXPECT_THROW(make_interval_grid(make_sis({1.0, 2.0}), 0.01, 0.01), NotBistable);
}

TEST(BellmanSis, ValuesMonotoneInStepsAndNonnegative)
{
    const auto model = make_sis();
    const auto grid  = make_interval_grid(model, 0.05, 0.02);
    BellmanConfig config;
    config.steps = 60;
    const auto vfg = bellman_backward(model, grid, config);
    ASSERT_EQ(vfg.steps(), 60u);
    for (std::size_t m = 1; m < 60; ++m) {
        const auto& now  = vfg.values(m);
        const auto& more = vfg.values(m + 1);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_GE(now[i], 0.0);
            EXPECT_LE(more[i], now[i] + 1e-12) << "m=" << m << " i=" << i;
        }
        EXPECT_EQ(now[grid.target], 0.0);
    }
}

TEST(BellmanSis, TerminalCostIsOneJump)
{
    const auto model = make_sis();
    const auto grid  = make_interval_grid(model, 0.1, 0.1);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double x = grid.nodes[i][0];
        EXPECT_NEAR(terminal_cost(model, grid, i), 0.1 * lagrangian_sis_extended(x, -x / 0.1, 1.5, 1.0), 1e-14);
    }
}

TEST(ExitCostSis, ConvergesNearQuasipotential)
{
    VBarConfig config;
    config.dt = 0.01;
    config.dx = 0.01;
    const auto result = compute_vbar(make_sis(), config);
    ASSERT_GE(result.table.size(), 3u);
    for (std::size_t k = 1; k < result.table.size(); ++k) {
        EXPECT_LE(result.table[k].second, result.table[k - 1].second + 1e-12);
    }
    const double oracle = sis_quasipotential(1.5, 1.0);
    EXPECT_TRUE(result.converged);
    EXPECT_GE(result.vbar, 0.066);
    EXPECT_LE(result.vbar, 0.075);
    EXPECT_GE(result.vbar, oracle - 0.01);
    EXPECT_NEAR(result.vbar, oracle, 0.005);
    EXPECT_EQ(result.metadata.at("grid"), "interval");

    // The optimal path leaves the endemic state and reaches the disease-free state.
    EXPECT_NEAR(result.path.state(0)[0], 1.0 / 3.0, 1e-12);
    EXPECT_LT(result.path.back()[0], 0.01);
}

TEST(ExitCostSis, ThreadCountDoesNotChangeResult)
{
    VBarConfig config;
    config.dt       = 0.05;
    config.dx       = 0.02;
    config.horizons = {5.0, 10.0};
    const auto serial = compute_vbar(make_sis(), config);
    config.threads    = 3;
    const auto parallel = compute_vbar(make_sis(), config);
    ASSERT_EQ(serial.table.size(), parallel.table.size());
    for (std::size_t k = 0; k < serial.table.size(); ++k) {
        EXPECT_EQ(serial.table[k].second, parallel.table[k].second);
    }
    EXPECT_EQ(serial.path.states, parallel.path.states);
}

TEST(ExitCostSis, RejectsHorizonOffTimeGrid)
{
    VBarConfig config;
    config.dt       = 0.3;
    config.horizons = {1.0};
    EXPECT_THROW(compute_vbar(make_sis(), config), ConfigError);
}

TEST(PlaneGrid, TargetIsExactNodeOnFirstAxis)
{
    const auto model = make_siv();
    const auto grid  = make_plane_grid(model, 0.05, 0.02, 0.02);
    const auto& target = grid.nodes[grid.target];
    EXPECT_NEAR(target[0], 0.226657, 1e-5);
    EXPECT_NEAR(target[1], 0.594537, 1e-5);
    EXPECT_NEAR(target[2], 0.178806, 1e-5);
    EXPECT_EQ(grid.lattice[grid.target][1], 0);
    EXPECT_LE(grid.dx1, 0.02);
    EXPECT_GT(grid.dx1, 0.015);
    for (const auto& node : grid.nodes) {
        EXPECT_TRUE(model.contains(node));
    }
    EXPECT_EQ(grid.nearest_node(grid.start), static_cast<std::size_t>(grid.node_at(0, 0)));
    EXPECT_THROW(make_plane_grid(make_sis(), 0.05, 0.02, 0.02), ConfigError);
}

TEST(PrintedSivTable, DiffersOnlyInVaccinationDirections)
{
    const auto consistent = make_siv();
    const auto printed    = make_builtin("siv_printed");
    EXPECT_EQ(printed.name(), "siv_printed");
    EXPECT_FALSE(printed.metzler().has_value());
    ASSERT_EQ(printed.jump_count(), consistent.jump_count());
    int flipped = 0;
    for (std::size_t j = 0; j < printed.jump_count(); ++j) {
        bool same = true;
        for (std::size_t i = 0; i < 3; ++i) {
            same = same && printed.direction(i, j) == consistent.direction(i, j);
        }
        flipped += same ? 0 : 1;
    }
    EXPECT_EQ(flipped, 2);
    // The printed table does not have the endemic equilibrium of the consistent model.
    const State x_star = {0.241552, 0.445587, 0.312861};
    EXPECT_LT(std::abs(drift(consistent, x_star)[1]), 1e-5);
    EXPECT_GT(std::abs(drift(printed, x_star)[1]), 0.1);
}

TEST(ExitCostSiv, CoarseGrid)
{
    const auto model   = make_siv();
    const auto printed = make_siv({}, SivJumpTable::as_printed);
    VBarConfig config;
    config.dt       = 0.05;
    config.dx       = 0.02;
    config.horizons = {5.0, 10.0};
    config.cost_model = &printed;
    const auto as_printed = compute_vbar(model, config);
    EXPECT_GE(as_printed.vbar, 0.35);
    EXPECT_LE(as_printed.vbar, 0.50);
    EXPECT_TRUE(as_printed.converged);
    EXPECT_EQ(as_printed.metadata.at("cost_model"), "siv_printed");

    config.cost_model = nullptr;
    const auto own = compute_vbar(model, config);
    EXPECT_GT(own.vbar, 0.0);
    EXPECT_LT(own.vbar, as_printed.vbar);

    for (const auto* result : {&as_printed, &own}) {
        const auto end = result->path.back();
        EXPECT_NEAR(end[1], 0.594537, 1e-5);
        EXPECT_NEAR(end[2], 0.178806, 1e-5);
        for (std::size_t k = 0; k < result->path.size(); ++k) {
            EXPECT_TRUE(model.contains(result->path.state(k)));
        }
    }
}

TEST(ExitCostSiv, CostModelDimensionChecked)
{
    const auto sis = make_sis();
    VBarConfig config;
    config.dt         = 0.05;
    config.dx         = 0.05;
    config.horizons   = {1.0};
    config.cost_model = &sis;
    EXPECT_THROW(compute_vbar(make_siv(), config), ConfigError);
}

} // namespace
