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
#include "epildp/simulation.hpp"
#include "epildp/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace epildp
{

namespace
{

constexpr double infinity = std::numeric_limits<double>::infinity();

/// Sample times 0, interval, 2 interval, ... strictly below T, then T.
std::vector<double> sample_times(double T, double interval)
{
    std::vector<double> times;
    const double tol = 1e-9 * std::max(1.0, T);
    for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * interval;
        if (t >= T - tol) {
            break;
        }
        times.push_back(t);
    }
    times.push_back(T);
    return times;
}

class Recorder
{
public:
    Recorder(Trajectory& path, double T, const Recording& recording)
        : m_path(path)
        , m_T(T)
        , m_every(!(recording.interval > 0.0))
    {
        if (!m_every) {
            m_times = sample_times(T, recording.interval);
        }
    }

    void start(std::span<const double> z, std::uint8_t flag)
    {
        m_current.assign(z.begin(), z.end());
        m_flag = flag;
        if (m_every) {
            m_path.push_back(0.0, z, flag);
        }
        else {
            emit_before(0.0);
        }
    }

    /// The state changes to z at time t.
    void change(double t, std::span<const double> z, std::uint8_t flag)
    {
        if (m_every) {
            m_path.push_back(t, z, flag);
            return;
        }
        emit_before(t);
        m_current.assign(z.begin(), z.end());
        m_flag = flag;
    }

    void finish()
    {
        if (m_every) {
            if (m_path.times.back() < m_T) {
                m_path.push_back(m_T, m_current.empty() ? m_path.back() : std::span<const double>(m_current),
                                 m_flag);
            }
            return;
        }
        while (m_next < m_times.size()) {
            m_path.push_back(m_times[m_next++], m_current, m_flag);
        }
    }

    void keep(std::span<const double> z, std::uint8_t flag)
    {
        m_current.assign(z.begin(), z.end());
        m_flag = flag;
    }

private:
    /// Emits every sample time strictly before t with the current state; time 0 inclusive at start.
    void emit_before(double t)
    {
        while (m_next < m_times.size() && (m_times[m_next] < t || (t == 0.0 && m_times[m_next] == 0.0))) {
            m_path.push_back(m_times[m_next++], m_current, m_flag);
        }
    }

    Trajectory& m_path;
    double m_T;
    bool m_every;
    std::vector<double> m_times;
    std::size_t m_next = 0;
    State m_current;
    std::uint8_t m_flag = Trajectory::none;
};

/// Shared state of all simulators: integer counts, proportions, propensities, clock and path.
class Engine
{
public:
    Engine(const ScaledModel& scaled, std::span<const double> x0, double T, RngStream& rng,
           const Recording& recording, TrajectorySource source)
        : m_scaled(scaled)
        , m_model(scaled.base())
        , m_T(T)
        , m_rng(rng)
        , m_n(static_cast<double>(scaled.population()))
        , m_result{Trajectory(scaled.base().dimension(), source), {}}
        , m_recorder(m_result.path, T, recording)
        , m_start(std::chrono::steady_clock::now())
    {
        if (!(T >= 0.0) || !std::isfinite(T)) {
            throw ConfigError("time horizon must be finite and non-negative");
        }
        const std::size_t d = m_model.dimension();
        const std::size_t k = m_model.jump_count();
        m_counts            = counts_from_state(scaled, x0);
        m_z.resize(d);
        for (std::size_t i = 0; i < d; ++i) {
            m_z[i] = static_cast<double>(m_counts[i]) / m_n;
        }
        m_a.resize(k);
        m_changes.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t i = 0; i < d; ++i) {
                if (m_model.direction(i, j) != 0) {
                    m_changes[j].emplace_back(i, m_model.direction(i, j));
                }
            }
        }
        m_result.stats.events.assign(k, 0);
        m_recorder.start(m_z, Trajectory::none);
    }

    double t() const
    {
        return m_t;
    }
    double horizon() const
    {
        return m_T;
    }
    std::span<const double> z() const
    {
        return m_z;
    }
    const std::vector<std::int64_t>& counts() const
    {
        return m_counts;
    }
    const std::vector<double>& propensities() const
    {
        return m_a;
    }
    SimStats& stats()
    {
        return m_result.stats;
    }
    RngStream& rng()
    {
        return m_rng;
    }

    double refresh()
    {
        m_a0 = m_scaled.propensities(m_z, m_a);
        return m_a0;
    }

    /// One exact step from the current state; false once absorbed or past the horizon.
    bool ssa_step()
    {
        const double a0 = refresh();
        if (!(a0 > 0.0)) {
            m_t = m_T;
            return false;
        }
        const double tau = m_rng.exponential(a0);
        if (m_t + tau >= m_T) {
            m_t = m_T;
            return false;
        }
        const auto j = m_rng.categorical(m_a, a0);
        apply(m_counts, j, 1);
        sync();
        m_t += tau;
        ++m_result.stats.events[j];
        ++m_result.stats.ssa_steps;
        m_recorder.change(m_t, m_z, flag());
        return true;
    }

    void burst(std::int64_t steps)
    {
        ++m_result.stats.fallbacks;
        for (std::int64_t s = 0; s < steps && ssa_step(); ++s) {
        }
    }

    /// Counts after p_j firings of every jump, applied to a copy.
    void propose(std::span<const std::int64_t> p, std::vector<std::int64_t>& out) const
    {
        out = m_counts;
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (p[j] != 0) {
                apply(out, j, p[j]);
            }
        }
    }

    bool admissible(const std::vector<std::int64_t>& counts) const
    {
        State z(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i) {
            z[i] = static_cast<double>(counts[i]) / m_n;
        }
        return m_model.contains(z);
    }

    void accept(double tau, std::span<const std::int64_t> p, std::vector<std::int64_t>& counts,
                std::uint8_t extra_flag = Trajectory::none)
    {
        m_counts.swap(counts);
        sync();
        m_t = std::min(m_T, m_t + tau);
        for (std::size_t j = 0; j < p.size(); ++j) {
            m_result.stats.events[j] += p[j];
        }
        ++m_result.stats.leaps;
        const auto f = static_cast<std::uint8_t>(flag() | extra_flag);
        if (f & Trajectory::out_of_range) {
            ++m_result.stats.domain_violations;
        }
        m_recorder.change(m_t, m_z, f);
    }

    SimulationResult finish()
    {
        m_recorder.keep(m_z, flag());
        m_recorder.finish();
        m_result.stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - m_start).count();
        return std::move(m_result);
    }

private:
    void apply(std::vector<std::int64_t>& counts, std::size_t j, std::int64_t times) const
    {
        for (const auto& [i, h] : m_changes[j]) {
            counts[i] += h * times;
        }
    }

    void sync()
    {
        for (std::size_t i = 0; i < m_z.size(); ++i) {
            m_z[i] = static_cast<double>(m_counts[i]) / m_n;
        }
    }

    std::uint8_t flag() const
    {
        return m_model.contains(m_z) ? Trajectory::none : Trajectory::out_of_range;
    }

    const ScaledModel& m_scaled;
    const CompartmentalModel& m_model;
    double m_T;
    RngStream& m_rng;
    double m_n;
    SimulationResult m_result;
    Recorder m_recorder;
    std::chrono::steady_clock::time_point m_start;
    std::vector<std::int64_t> m_counts;
    State m_z;
    std::vector<double> m_a;
    double m_a0 = 0.0;
    double m_t  = 0.0;
    std::vector<std::vector<std::pair<std::size_t, int>>> m_changes;
};

/// Smallest count among compartments that jump j decreases, including the implicit
/// compartment 1 - sum z for models whose coordinates sum to at most one.
double depletion_count(const CompartmentalModel& model, const std::vector<std::int64_t>& counts,
                       std::int64_t population, std::size_t j)
{
    double smallest = infinity;
    int total       = 0;
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const int h = model.direction(i, j);
        total += h;
        sum += counts[i];
        if (h < 0) {
            smallest = std::min(smallest, static_cast<double>(counts[i]));
        }
    }
    if (model.domain().sum == SumConstraint::at_most_one && -total < 0) {
        smallest = std::min(smallest, static_cast<double>(population - sum));
    }
    return smallest;
}

} // namespace

std::string to_string(TauVariant variant)
{
    switch (variant) {
    case TauVariant::explicit_step:
        return "explicit";
    case TauVariant::implicit_rate:
        return "implicit_rate";
    case TauVariant::midpoint:
        return "midpoint";
    case TauVariant::modified:
        return "modified";
    }
    return "unknown";
}

std::string to_string(RepairMode mode)
{
    return mode == RepairMode::resample ? "resample" : "thinning";
}

std::string to_string(TauSelection selection)
{
    return selection == TauSelection::standard ? "standard" : "as_printed";
}

std::string to_string(SimulatorKind kind)
{
    return kind == SimulatorKind::ssa ? "ssa" : "tau_leap";
}

TauVariant parse_tau_variant(const std::string& text)
{
    for (auto v : {TauVariant::explicit_step, TauVariant::implicit_rate, TauVariant::midpoint, TauVariant::modified}) {
        if (text == to_string(v)) {
            return v;
        }
    }
    throw ConfigError("unknown tau-leaping variant '" + text + "'");
}

RepairMode parse_repair_mode(const std::string& text)
{
    for (auto m : {RepairMode::resample, RepairMode::thinning}) {
        if (text == to_string(m)) {
            return m;
        }
    }
    throw ConfigError("unknown repair mode '" + text + "'");
}

TauSelection parse_tau_selection(const std::string& text)
{
    for (auto s : {TauSelection::standard, TauSelection::as_printed}) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw ConfigError("unknown tau selection '" + text + "'");
}

SimulatorKind parse_simulator(const std::string& text)
{
    for (auto s : {SimulatorKind::ssa, SimulatorKind::tau_leap}) {
        if (text == to_string(s)) {
            return s;
        }
    }
    throw ConfigError("unknown simulator '" + text + "'");
}

void TauLeapConfig::validate() const
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw ConfigError("epsilon must lie in (0, 1)");
    }
    if (n <= 0 || n_bar <= 0) {
        throw ConfigError("n and n_bar must be positive");
    }
    if (n_c < 0 || max_halvings < 0) {
        throw ConfigError("n_c and max_halvings must be non-negative");
    }
}

void SimStats::merge(const SimStats& other)
{
    if (events.size() < other.events.size()) {
        events.resize(other.events.size(), 0);
    }
    for (std::size_t j = 0; j < other.events.size(); ++j) {
        events[j] += other.events[j];
    }
    ssa_steps += other.ssa_steps;
    fallbacks += other.fallbacks;
    leaps += other.leaps;
    repairs += other.repairs;
    repair_exhausted += other.repair_exhausted;
    domain_violations += other.domain_violations;
    seconds += other.seconds;
}

std::vector<std::int64_t> counts_from_state(const ScaledModel& scaled, std::span<const double> x0)
{
    const auto& model = scaled.base();
    if (x0.size() != model.dimension() || !model.contains(x0)) {
        throw DomainError("initial state is not in the model domain");
    }
    const auto n = scaled.population();
    std::vector<std::int64_t> counts(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) {
        counts[i] = std::llround(x0[i] * static_cast<double>(n));
    }
    if (model.domain().sum == SumConstraint::equal_one && model.dependent()) {
        const auto dep = *model.dependent();
        std::int64_t others = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            others += i == dep ? 0 : counts[i];
        }
        counts[dep] = n - others;
    }
    State z(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) {
        z[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
    }
    if (!model.contains(z)) {
        throw DomainError("initial state rounds to counts outside the model domain");
    }
    return counts;
}

SimulationResult ssa_direct(const ScaledModel& scaled, std::span<const double> x0, double T, RngStream& rng,
                            const Recording& recording)
{
    Engine engine(scaled, x0, T, rng, recording, TrajectorySource::ssa);
    while (engine.ssa_step()) {
    }
    return engine.finish();
}

double tau_select(const ScaledModel& scaled, std::span<const double> z, double epsilon,
                  const std::vector<bool>* noncritical, TauSelection selection)
{
    const auto& model = scaled.base();
    const std::size_t k = model.jump_count();
    const std::size_t d = model.dimension();
    std::vector<double> a(k);
    const double a0 = scaled.propensities(z, a);
    if (!(a0 > 0.0)) {
        return infinity;
    }
    if (noncritical && std::none_of(noncritical->begin(), noncritical->end(), [](bool b) {
            return b;
        })) {
        return infinity;
    }
    const Eigen::MatrixXd jac = rate_jacobian(scaled, z);
    const double n            = static_cast<double>(scaled.population());
    double tau                = infinity;
    for (std::size_t j = 0; j < k; ++j) {
        double mu    = 0.0;
        double sigma = 0.0;
        for (std::size_t jp = 0; jp < k; ++jp) {
            if (noncritical && !(*noncritical)[jp]) {
                continue;
            }
            double f = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                f += jac(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * model.direction(i, jp) / n;
            }
            const double weight = selection == TauSelection::standard ? a[jp] : a[j];
            mu += f * weight;
            sigma += f * f * weight;
        }
        if (mu != 0.0) {
            tau = std::min(tau, epsilon * a0 / std::abs(mu));
        }
        if (sigma > 0.0) {
            tau = std::min(tau, epsilon * epsilon * a0 * a0 / sigma);
        }
    }
    return tau;
}

std::vector<double> tau_leap_variant_rates(const ScaledModel& scaled, std::span<const double> z, double tau,
                                           TauVariant variant)
{
    const auto& model = scaled.base();
    std::vector<double> a(model.jump_count());
    if (variant == TauVariant::explicit_step || variant == TauVariant::modified) {
        scaled.propensities(z, a);
        return a;
    }
    const double fraction = variant == TauVariant::implicit_rate ? 1.0 : 0.5;
    State b(z.size());
    drift_unchecked(model, z, b);
    State predicted(z.begin(), z.end());
    for (std::size_t i = 0; i < z.size(); ++i) {
        predicted[i] += fraction * tau * b[i];
    }
    scaled.propensities(predicted, a);
    return a;
}

SimulationResult tau_leap_explicit(const ScaledModel& scaled, std::span<const double> x0, double T,
                                   const TauLeapConfig& config, RngStream& rng, const Recording& recording)
{
    config.validate();
    if (config.variant == TauVariant::modified) {
        throw ConfigError("the modified variant is simulated by tau_leap_modified");
    }
    Engine engine(scaled, x0, T, rng, recording, TrajectorySource::tau_leap);
    const std::size_t k = scaled.base().jump_count();
    std::vector<std::int64_t> p(k), proposal;
    while (engine.t() < T) {
        const double a0 = engine.refresh();
        if (!(a0 > 0.0)) {
            break;
        }
        double tau = tau_select(scaled, engine.z(), config.epsilon, nullptr, config.tau_select);
        if (tau < static_cast<double>(config.n) / a0) {
            engine.burst(config.n_bar);
            continue;
        }
        tau               = std::min(tau, T - engine.t());
        const auto frozen = tau_leap_variant_rates(scaled, engine.z(), tau, config.variant);
        for (std::size_t j = 0; j < k; ++j) {
            p[j] = engine.rng().poisson(frozen[j] * tau);
        }
        engine.propose(p, proposal);
        engine.accept(tau, p, proposal);
    }
    return engine.finish();
}

SimulationResult tau_leap_modified(const ScaledModel& scaled, std::span<const double> x0, double T,
                                   const TauLeapConfig& config, RngStream& rng, const Recording& recording)
{
    config.validate();
    Engine engine(scaled, x0, T, rng, recording, TrajectorySource::tau_leap);
    const auto& model   = scaled.base();
    const std::size_t k = model.jump_count();
    std::vector<std::int64_t> p(k), previous(k), proposal;
    std::vector<bool> noncritical(k);
    std::vector<double> critical_rates(k);

    while (engine.t() < T) {
        const double a0 = engine.refresh();
        if (!(a0 > 0.0)) {
            break;
        }
        const auto& a = engine.propensities();
        double a0c    = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const bool critical =
                a[j] > 0.0 && depletion_count(model, engine.counts(), scaled.population(), j) <
                                  static_cast<double>(config.n_c);
            noncritical[j]    = !critical;
            critical_rates[j] = critical ? a[j] : 0.0;
            a0c += critical_rates[j];
        }

        double tau_noncritical = tau_select(scaled, engine.z(), config.epsilon, &noncritical, config.tau_select);
        if (tau_noncritical < static_cast<double>(config.n) / a0) {
            engine.burst(config.n_bar);
            continue;
        }
        const double tau_critical = a0c > 0.0 ? engine.rng().exponential(a0c) : infinity;
        tau_noncritical           = std::min(tau_noncritical, T - engine.t());

        double previous_tau = 0.0;
        bool accepted       = false;
        for (int halvings = 0;; ++halvings) {
            const bool critical_fires = tau_critical <= tau_noncritical;
            const double tau          = critical_fires ? tau_critical : tau_noncritical;
            const bool thin = config.repair == RepairMode::thinning && halvings > 0 && tau < previous_tau;
            for (std::size_t j = 0; j < k; ++j) {
                if (!noncritical[j]) {
                    p[j] = 0;
                }
                else if (thin) {
                    p[j] = engine.rng().binomial(previous[j], tau / previous_tau);
                }
                else {
                    p[j] = engine.rng().poisson(a[j] * tau);
                }
            }
            if (critical_fires) {
                ++p[engine.rng().categorical(critical_rates, a0c)];
            }
            engine.propose(p, proposal);
            if (engine.admissible(proposal)) {
                engine.accept(tau, p, proposal, halvings > 0 ? Trajectory::repaired : Trajectory::none);
                accepted = true;
                break;
            }
            if (halvings == config.max_halvings) {
                break;
            }
            ++engine.stats().repairs;
            previous          = p;
            previous_tau      = tau;
            tau_noncritical  *= 0.5;
        }
        if (!accepted) {
            ++engine.stats().repair_exhausted;
            engine.burst(config.n_bar);
        }
    }
    return engine.finish();
}

SimulationResult tau_leap(const ScaledModel& scaled, std::span<const double> x0, double T,
                          const TauLeapConfig& config, RngStream& rng, const Recording& recording)
{
    if (config.variant == TauVariant::modified) {
        return tau_leap_modified(scaled, x0, T, config, rng, recording);
    }
    return tau_leap_explicit(scaled, x0, T, config, rng, recording);
}

EnsembleSummary ensemble_run(const ScaledModel& scaled, const SimulationSpec& spec, std::size_t replicates,
                             std::uint64_t seed, unsigned threads)
{
    if (replicates == 0) {
        throw ConfigError("at least one replicate is required");
    }
    if (!(spec.horizon > 0.0) || !(spec.sample_interval > 0.0)) {
        throw ConfigError("horizon and sample interval must be positive");
    }
    if (spec.simulator == SimulatorKind::tau_leap) {
        spec.tau.validate();
    }
    const std::size_t d = scaled.base().dimension();
    counts_from_state(scaled, spec.x0);

    EnsembleSummary summary;
    summary.dimension  = d;
    summary.replicates = replicates;
    summary.times      = sample_times(spec.horizon, spec.sample_interval);
    const std::size_t n_times = summary.times.size();

    std::vector<double> samples(replicates * n_times * d);
    std::vector<SimStats> stats(replicates);
    std::vector<Trajectory> paths(spec.keep_paths ? replicates : 0);
    const Recording recording{spec.sample_interval};

    details::parallel_for(replicates, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            RngStream rng(seed, r);
            auto result = spec.simulator == SimulatorKind::ssa
                              ? ssa_direct(scaled, spec.x0, spec.horizon, rng, recording)
                              : tau_leap(scaled, spec.x0, spec.horizon, spec.tau, rng, recording);
            if (result.path.size() != n_times) {
                throw NoConvergence("sampled path does not match the summary time grid");
            }
            std::copy(result.path.states.begin(), result.path.states.end(),
                      samples.begin() + static_cast<std::ptrdiff_t>(r * n_times * d));
            stats[r] = std::move(result.stats);
            if (spec.keep_paths) {
                paths[r] = std::move(result.path);
            }
        }
    });

    const std::size_t cells = n_times * d;
    summary.mean.assign(cells, 0.0);
    summary.variance.assign(cells, 0.0);
    summary.min.assign(cells, infinity);
    summary.max.assign(cells, -infinity);
    for (std::size_t r = 0; r < replicates; ++r) {
        const double* row = samples.data() + r * cells;
        for (std::size_t c = 0; c < cells; ++c) {
            summary.mean[c] += row[c];
            summary.min[c] = std::min(summary.min[c], row[c]);
            summary.max[c] = std::max(summary.max[c], row[c]);
        }
    }
    for (auto& m : summary.mean) {
        m /= static_cast<double>(replicates);
    }
    if (replicates > 1) {
        for (std::size_t r = 0; r < replicates; ++r) {
            const double* row = samples.data() + r * cells;
            for (std::size_t c = 0; c < cells; ++c) {
                const double dev = row[c] - summary.mean[c];
                summary.variance[c] += dev * dev;
            }
        }
        for (auto& v : summary.variance) {
            v /= static_cast<double>(replicates - 1);
        }
    }
    summary.stats.events.assign(scaled.base().jump_count(), 0);
    for (const auto& s : stats) {
        summary.stats.merge(s);
    }
    summary.paths = std::move(paths);
    return summary;
}

} // namespace epildp
