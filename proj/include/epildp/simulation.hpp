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
#ifndef EPILDP_SIMULATION_HPP
#define EPILDP_SIMULATION_HPP

#include "epildp/model.hpp"
#include "epildp/random.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epildp
{

enum class TauVariant
{
    explicit_step, ///< rates frozen at the current state
    implicit_rate, ///< rates frozen at the Euler prediction z + tau b(z)
    midpoint,      ///< rates frozen at z + tau b(z) / 2
    modified,      ///< explicit rates with critical jumps firing at most once per leap
};

enum class RepairMode
{
    resample, ///< halve the leap and draw fresh Poisson increments
    thinning, ///< halve the leap and thin the previous increments binomially
};

enum class TauSelection
{
    standard,   ///< mu_j = sum_j' f_jj' a_j', sigma_j^2 = sum_j' f_jj'^2 a_j'
    as_printed, ///< mu_j = sum_j' f_jj' a_j, sigma_j^2 = sum_j' f_jj'^2 a_j
};

std::string to_string(TauVariant variant);
std::string to_string(RepairMode mode);
std::string to_string(TauSelection selection);
/// Parses "explicit", "implicit_rate", "midpoint", "modified"; throws ConfigError otherwise.
TauVariant parse_tau_variant(const std::string& text);
RepairMode parse_repair_mode(const std::string& text);
TauSelection parse_tau_selection(const std::string& text);

struct TauLeapConfig {
    double epsilon = 0.03;
    /// Leaps shorter than n / a_0 are replaced by n_bar exact steps.
    std::int64_t n = 10;
    std::int64_t n_bar = 100;
    /// A jump is critical when it can empty some compartment in fewer than n_c firings (counts).
    std::int64_t n_c = 10;
    TauVariant variant = TauVariant::modified;
    int max_halvings = 20;
    RepairMode repair = RepairMode::resample;
    TauSelection tau_select = TauSelection::standard;

    /// Throws ConfigError unless 0 < epsilon < 1, n and n_bar positive, n_c and max_halvings non-negative.
    void validate() const;
};

struct SimStats {
    /// Number of firings per jump type.
    std::vector<std::int64_t> events;
    /// Exact steps, including those inside fallback bursts.
    std::int64_t ssa_steps = 0;
    /// Number of fallback bursts.
    std::int64_t fallbacks = 0;
    std::int64_t leaps = 0;
    /// Leap halvings after a step left the domain.
    std::int64_t repairs = 0;
    /// Leaps abandoned after max_halvings; an exact burst is run instead.
    std::int64_t repair_exhausted = 0;
    /// Recorded states outside the domain (explicit variants only).
    std::int64_t domain_violations = 0;
    double seconds = 0.0;

    void merge(const SimStats& other);
};

/// How a path is recorded. interval == 0 records every state change; interval > 0 records
/// the state at 0, interval, 2 interval, ... (right-continuous). The final time is always recorded.
struct Recording {
    double interval = 0.0;
};

struct SimulationResult {
    Trajectory path;
    SimStats stats;
};

/// Integer compartment counts N z for a state in the domain (the dependent coordinate absorbs rounding).
std::vector<std::int64_t> counts_from_state(const ScaledModel& scaled, std::span<const double> x0);

/// Exact direct-method simulation on [0, T]. An absorbed state (a_0 = 0) is held until T.
SimulationResult ssa_direct(const ScaledModel& scaled, std::span<const double> x0, double T, RngStream& rng,
                            const Recording& recording = {});

/// Leap length from the leap condition at z. With a mask, only jumps j' with noncritical[j'] enter
/// the sums; +inf if no jump is noncritical or every sensitivity vanishes.
double tau_select(const ScaledModel& scaled, std::span<const double> z, double epsilon,
                  const std::vector<bool>* noncritical = nullptr,
                  TauSelection selection = TauSelection::standard);

/// Propensities frozen for a leap of length tau: a_j at z (explicit and modified), at z + tau b(z)
/// (implicit_rate) or at z + tau b(z) / 2 (midpoint). Negative values are clamped to zero.
std::vector<double> tau_leap_variant_rates(const ScaledModel& scaled, std::span<const double> z, double tau,
                                           TauVariant variant);

/// Poisson tau-leaping with exact fallback bursts. Uses config.variant for the frozen rates
/// (explicit_step, implicit_rate or midpoint). States leaving the domain are flagged, not repaired.
SimulationResult tau_leap_explicit(const ScaledModel& scaled, std::span<const double> x0, double T,
                                   const TauLeapConfig& config, RngStream& rng, const Recording& recording = {});

/// Tau-leaping with critical jumps and leap halving; every recorded state lies in the domain.
SimulationResult tau_leap_modified(const ScaledModel& scaled, std::span<const double> x0, double T,
                                   const TauLeapConfig& config, RngStream& rng, const Recording& recording = {});

/// Dispatches on config.variant.
SimulationResult tau_leap(const ScaledModel& scaled, std::span<const double> x0, double T,
                          const TauLeapConfig& config, RngStream& rng, const Recording& recording = {});

enum class SimulatorKind
{
    ssa,
    tau_leap,
};

std::string to_string(SimulatorKind kind);
SimulatorKind parse_simulator(const std::string& text);

struct SimulationSpec {
    SimulatorKind simulator = SimulatorKind::ssa;
    TauLeapConfig tau;
    State x0;
    double horizon = 50.0;
    /// Spacing of the summary time grid.
    double sample_interval = 0.1;
    bool keep_paths = false;
};

struct EnsembleSummary {
    std::size_t dimension = 0;
    std::size_t replicates = 0;
    std::vector<double> times;
    /// Row-major (time, coordinate) statistics; the variance uses the n - 1 denominator.
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<double> min;
    std::vector<double> max;
    SimStats stats;
    std::vector<Trajectory> paths;

    double mean_at(std::size_t time_index, std::size_t coordinate) const
    {
        return mean[time_index * dimension + coordinate];
    }
};

/// Runs replicates r = 0..replicates-1 with RngStream(seed, r) and reduces them in replicate
/// order, so the result does not depend on the thread count.
EnsembleSummary ensemble_run(const ScaledModel& scaled, const SimulationSpec& spec, std::size_t replicates,
                             std::uint64_t seed, unsigned threads = 1);

} // namespace epildp

#endif // EPILDP_SIMULATION_HPP
