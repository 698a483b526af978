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
#include "epildp/nsfd.hpp"
#include "epildp/simulation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace
{

using namespace epildp;
using Terms = std::vector<Monomial>;

/// One coordinate on [0, upper] with a single jump of direction h and polynomial rate.
CompartmentalModel single_jump_model(int h, Monomial rate, double upper)
{
    ModelDefinition def;
    def.name         = "single";
    def.compartments = {"X"};
    def.jumps.push_back({{h}, Polynomial(Terms{std::move(rate)}), "jump"});
    def.domain    = {{0.0}, {upper}, SumConstraint::none};
    def.infected  = {0};
    return CompartmentalModel(std::move(def));
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf)
{
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d       = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

bool same_path(const Trajectory& a, const Trajectory& b)
{
    return a.times == b.times && a.states == b.states && a.flags == b.flags;
}

TEST(RngStream, ReproducibleAndStreamsIndependent)
{
    RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    bool differs_stream = false, differs_seed = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        differs_stream = differs_stream || x != c();
        differs_seed   = differs_seed || x != d();
    }
    EXPECT_TRUE(differs_stream);
    EXPECT_TRUE(differs_seed);
}

TEST(RngStream, UniformInOpenInterval)
{
    RngStream rng(1, 0);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 100000.0));
}

TEST(RngStream, PoissonMoments)
{
    RngStream rng(5, 0);
    EXPECT_EQ(rng.poisson(0.0), 0);
    EXPECT_THROW(rng.poisson(-1.0), DomainError);
    for (double mean : {0.3, 3.0, 9.9, 10.0, 50.0, 4000.0}) {
        const int n = 100000;
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<double>(rng.poisson(mean));
            ASSERT_GE(k, 0.0);
            s += k;
            s2 += k * k;
        }
        const double m   = s / n;
        const double var = (s2 - n * m * m) / (n - 1);
        EXPECT_NEAR(m, mean, 4.0 * std::sqrt(mean / n)) << mean;
        // Variance of the sample variance of a Poisson variable: (mean + 2 mean^2) / n.
        EXPECT_NEAR(var, mean, 4.0 * std::sqrt((mean + 2.0 * mean * mean) / n)) << mean;
    }
}

TEST(RngStream, PoissonProbabilitiesSmallMean)
{
    RngStream rng(6, 0);
    const double mean = 2.5;
    const int n       = 200000;
    std::vector<int> hist(8, 0);
    for (int i = 0; i < n; ++i) {
        const auto k = rng.poisson(mean);
        if (k < 8) {
            ++hist[static_cast<std::size_t>(k)];
        }
    }
    double p = std::exp(-mean);
    for (int k = 0; k < 8; ++k) {
        EXPECT_NEAR(hist[static_cast<std::size_t>(k)] / static_cast<double>(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
        p *= mean / (k + 1);
    }
}

TEST(RngStream, BinomialAndCategorical)
{
    RngStream rng(7, 0);
    EXPECT_EQ(rng.binomial(0, 0.5), 0);
    EXPECT_EQ(rng.binomial(17, 1.0), 17);
    EXPECT_THROW(rng.binomial(3, 1.5), DomainError);
    double s = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const auto k = rng.binomial(40, 0.25);
        ASSERT_LE(k, 40);
        s += static_cast<double>(k);
    }
    EXPECT_NEAR(s / 20000.0, 10.0, 4.0 * std::sqrt(40 * 0.25 * 0.75 / 20000.0));

    const std::vector<double> w = {0.0, 1.0, 0.0, 3.0};
    std::vector<int> counts(4, 0);
    for (int i = 0; i < 40000; ++i) {
        ++counts[rng.categorical(w, 4.0)];
    }
    EXPECT_EQ(counts[0], 0);
    EXPECT_EQ(counts[2], 0);
    EXPECT_NEAR(counts[1] / 40000.0, 0.25, 4.0 * std::sqrt(0.25 * 0.75 / 40000.0));
}

TEST(Ssa, AbsorbingStateGivesConstantPath)
{
    const ScaledModel scaled(make_sis(), 2000);
    RngStream rng(1, 0);
    const State x0 = {0.0};
    const auto result = ssa_direct(scaled, x0, 50.0, rng);
    ASSERT_EQ(result.path.size(), 2u);
    EXPECT_EQ(result.path.times.back(), 50.0);
    EXPECT_EQ(result.path.back()[0], 0.0);
    EXPECT_EQ(result.stats.ssa_steps, 0);
}

TEST(Ssa, InterEventTimesAreExponential)
{
    const double beta = 0.5;
    const ScaledModel scaled(single_jump_model(+1, {beta, {0}}, 1e6), 100);
    RngStream rng(11, 0);
    const State x0 = {0.0};
    const auto result = ssa_direct(scaled, x0, 230.0, rng);
    std::vector<double> gaps;
    for (std::size_t k = 1; k + 1 < result.path.size() && gaps.size() < 10000; ++k) {
        gaps.push_back(result.path.times[k] - result.path.times[k - 1]);
    }
    ASSERT_EQ(gaps.size(), 10000u);
    const double rate = 100.0 * beta;
    const double d    = ks_statistic(gaps, [&](double t) {
        return 1.0 - std::exp(-rate * t);
    });
    EXPECT_LT(d, 1.628 / std::sqrt(10000.0));
}

TEST(Ssa, PureDeathExtinctionIsHypoexponential)
{
    const int m        = 10;
    const double gamma = 1.0;
    const ScaledModel scaled(single_jump_model(-1, {gamma, {1}}, 1.0), m);
    const State x0 = {1.0};
    double mean = 0.0, var = 0.0;
    for (int i = 1; i <= m; ++i) {
        mean += 1.0 / (gamma * i);
        var += 1.0 / (gamma * i * gamma * i);
    }
    const int n = 10000;
    std::vector<double> times(n);
    for (int r = 0; r < n; ++r) {
        RngStream rng(99, static_cast<std::uint64_t>(r));
        const auto result = ssa_direct(scaled, x0, 100.0, rng);
        ASSERT_EQ(result.path.back()[0], 0.0);
        times[static_cast<std::size_t>(r)] = result.path.times[result.path.size() - 2];
    }
    const double sample_mean = std::accumulate(times.begin(), times.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double t : times) {
        m2 += (t - sample_mean) * (t - sample_mean);
        m4 += std::pow(t - sample_mean, 4);
    }
    const double sample_var = m2 / (n - 1);
    m4 /= n;
    EXPECT_NEAR(sample_mean, mean, 3.0 * std::sqrt(var / n));
    EXPECT_NEAR(sample_var, var, 3.0 * std::sqrt((m4 - sample_var * sample_var) / n));
}

// Leap length for the SIS model written out by hand.
double sis_tau_oracle(double z, double beta, double gamma, double n, double eps)
{
    const double a1 = n * beta * z * (1.0 - z), a2 = n * gamma * z;
    const double d1 = n * beta * (1.0 - 2.0 * z), d2 = n * gamma;
    const double a0 = a1 + a2;
    const double f11 = d1 / n, f12 = -d1 / n, f21 = d2 / n, f22 = -d2 / n;
    const double mu1 = f11 * a1 + f12 * a2, mu2 = f21 * a1 + f22 * a2;
    const double s1 = f11 * f11 * a1 + f12 * f12 * a2, s2 = f21 * f21 * a1 + f22 * f22 * a2;
    double tau = INFINITY;
    for (double mu : {mu1, mu2}) {
        if (mu != 0.0) {
            tau = std::min(tau, eps * a0 / std::abs(mu));
        }
    }
    for (double s : {s1, s2}) {
        tau = std::min(tau, eps * eps * a0 * a0 / s);
    }
    return tau;
}

TEST(TauSelect, MatchesHandWrittenFormula)
{
    const ScaledModel scaled(make_sis(), 2000);
    for (double z : {1.0 / 3.0, 0.1, 0.05, 0.6, 0.9}) {
        const State x = {z};
        const double expected = sis_tau_oracle(z, 1.5, 1.0, 2000.0, 0.03);
        EXPECT_NEAR(tau_select(scaled, x, 0.03), expected, 1e-12 * expected) << z;
    }
}

TEST(TauSelect, ConstantRatesGiveInfiniteLeap)
{
    const ScaledModel scaled(single_jump_model(+1, {2.0, {0}}, 10.0), 100);
    const State x = {0.5};
    EXPECT_TRUE(std::isinf(tau_select(scaled, x, 0.03)));
}

TEST(TauSelect, EpsilonScaling)
{
    const ScaledModel sis(make_sis(), 5000);
    const ScaledModel siv(make_siv(), 5000);
    RngStream rng(3, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const double eps = 0.005 + 0.2 * rng.uniform();
        const State x    = {0.02 + 0.95 * rng.uniform()};
        const double r1  = tau_select(sis, x, 2.0 * eps) / tau_select(sis, x, eps);
        EXPECT_GE(r1, 2.0 - 1e-12);
        EXPECT_LE(r1, 4.0 + 1e-12);

        const double v = 0.9 * rng.uniform(), i = (0.95 - v) * rng.uniform();
        const State y  = {1.0 - v - i, v, i};
        const double r2 = tau_select(siv, y, 2.0 * eps) / tau_select(siv, y, eps);
        EXPECT_GE(r2, 2.0 - 1e-12);
        EXPECT_LE(r2, 4.0 + 1e-12);
    }
}

TEST(TauSelect, RestrictionAndPrintedIndices)
{
    const ScaledModel scaled(make_sis(), 2000);
    const State x = {0.2};
    const std::vector<bool> none = {false, false};
    const std::vector<bool> all  = {true, true};
    EXPECT_TRUE(std::isinf(tau_select(scaled, x, 0.03, &none)));
    EXPECT_EQ(tau_select(scaled, x, 0.03, &all), tau_select(scaled, x, 0.03));
    {
        // Only the recovery jump enters the sums over j'.
        const double ar = 2000 * 0.2, a_tot = 2000 * 1.5 * 0.2 * 0.8 + ar;
        const double f1 = -1.5 * 0.6, f2 = -1.0;
        double expected = INFINITY;
        for (double f : {f1, f2}) {
            expected = std::min({expected, 0.03 * a_tot / std::abs(f * ar), 0.03 * 0.03 * a_tot * a_tot / (f * f * ar)});
        }
        const std::vector<bool> only_recovery = {false, true};
        EXPECT_NEAR(tau_select(scaled, x, 0.03, &only_recovery), expected, 1e-12 * expected);
    }

    // Literal indices: a_j outside the sum over j'.
    const double a1 = 2000 * 1.5 * 0.2 * 0.8, a2 = 2000 * 0.2, a0 = a1 + a2;
    const double d1 = 1.5 * 0.6, d2 = 1.0;
    const double mu1 = a1 * (d1 - d1), mu2 = a2 * (d2 - d2);
    ASSERT_EQ(mu1, 0.0);
    ASSERT_EQ(mu2, 0.0);
    const double expected = std::min(0.03 * 0.03 * a0 * a0 / (a1 * 2 * d1 * d1), 0.03 * 0.03 * a0 * a0 / (a2 * 2 * d2 * d2));
    const double printed  = tau_select(scaled, x, 0.03, nullptr, TauSelection::as_printed);
    EXPECT_NEAR(printed, expected, 1e-12 * expected);
}

TEST(TauLeapRates, EquilibriumLeavesRatesUnchanged)
{
    const auto siv = make_siv();
    const ScaledModel scaled(siv, 1000);
    const State x_star = {0.2415523, 0.4455866, 0.3128611};
    const auto eq      = find_equilibria(siv, default_seeds(siv)).equilibria;
    for (const auto& e : eq) {
        const auto reference = tau_leap_variant_rates(scaled, e.point, 0.7, TauVariant::explicit_step);
        for (auto v : {TauVariant::implicit_rate, TauVariant::midpoint, TauVariant::modified}) {
            const auto rates = tau_leap_variant_rates(scaled, e.point, 0.7, v);
            for (std::size_t j = 0; j < rates.size(); ++j) {
                EXPECT_NEAR(rates[j], reference[j], 1e-9 * (1.0 + reference[j]));
            }
        }
    }
    (void)x_star;
}

TEST(TauLeapRates, LinearModelConditionalMean)
{
    // Pure death at rate gamma z: exact conditional mean z exp(-gamma tau).
    const double gamma = 1.3, z = 0.5;
    const ScaledModel scaled(single_jump_model(-1, {gamma, {1}}, 1.0), 1000);
    const State x = {z};
    auto leap_mean = [&](double tau, TauVariant v) {
        return z - tau * tau_leap_variant_rates(scaled, x, tau, v)[0] / 1000.0;
    };
    for (double tau : {0.04, 0.02, 0.01, 0.005}) {
        const double exact    = z * std::exp(-gamma * tau);
        const double implicit = leap_mean(tau, TauVariant::implicit_rate) - exact;
        const double midpoint = leap_mean(tau, TauVariant::midpoint) - exact;
        const double expl     = leap_mean(tau, TauVariant::explicit_step) - exact;
        EXPECT_NEAR(implicit / (tau * tau), gamma * gamma * z / 2.0, 0.05 * gamma * gamma * z) << tau;
        EXPECT_NEAR(expl / (tau * tau), -gamma * gamma * z / 2.0, 0.05 * gamma * gamma * z) << tau;
        EXPECT_LT(std::abs(midpoint), gamma * gamma * gamma * z * tau * tau * tau) << tau;
    }
}

TEST(TauLeap, ConfigValidation)
{
    TauLeapConfig config;
    EXPECT_NO_THROW(config.validate());
    config.epsilon = 1.0;
    EXPECT_THROW(config.validate(), ConfigError);
    config.epsilon = 0.03;
    config.n_bar   = 0;
    EXPECT_THROW(config.validate(), ConfigError);
    EXPECT_THROW(parse_tau_variant("implicit"), ConfigError);
    EXPECT_EQ(parse_tau_variant("explicit"), TauVariant::explicit_step);
    EXPECT_EQ(parse_repair_mode("thinning"), RepairMode::thinning);
    EXPECT_EQ(parse_tau_selection("as_printed"), TauSelection::as_printed);

    const ScaledModel scaled(make_sis(), 100);
    RngStream rng(1, 0);
    TauLeapConfig modified;
    const State x0 = {0.1};
    EXPECT_THROW(tau_leap_explicit(scaled, x0, 1.0, modified, rng), ConfigError);
    const State outside = {1.5};
    EXPECT_THROW(ssa_direct(scaled, outside, 1.0, rng), DomainError);
}

TEST(TauLeap, PerpetualFallbackIsSsa)
{
    for (const auto& [model, x0] : {std::pair{make_sis(), State{0.1}}, {make_siv(), State{0.1, 0.2, 0.7}}}) {
        const ScaledModel scaled(model, 500);
        TauLeapConfig config;
        config.variant = TauVariant::explicit_step;
        config.n       = 1'000'000'000;
        for (std::uint64_t r = 0; r < 5; ++r) {
            RngStream a(17, r), b(17, r);
            const auto exact = ssa_direct(scaled, x0, 10.0, a);
            const auto leap  = tau_leap_explicit(scaled, x0, 10.0, config, b);
            EXPECT_TRUE(same_path(exact.path, leap.path));
            EXPECT_GT(leap.stats.fallbacks, 0);
            EXPECT_EQ(leap.stats.leaps, 0);
            EXPECT_EQ(leap.stats.events, exact.stats.events);
        }
    }
}

TEST(TauLeap, ModifiedWithoutCriticalJumpsIsExplicit)
{
    const ScaledModel scaled(make_siv(), 20000);
    const State x0 = {0.3, 0.4, 0.3};
    TauLeapConfig modified;
    modified.n_c = 0;
    TauLeapConfig plain = modified;
    plain.variant       = TauVariant::explicit_step;
    for (std::uint64_t r = 0; r < 20; ++r) {
        RngStream a(5, r), b(5, r);
        const auto m = tau_leap_modified(scaled, x0, 5.0, modified, a);
        const auto e = tau_leap_explicit(scaled, x0, 5.0, plain, b);
        ASSERT_EQ(m.stats.repairs, 0);
        EXPECT_TRUE(same_path(m.path, e.path));
    }
}

TEST(TauLeap, ModifiedStaysInDomainFromOneInfective)
{
    const ScaledModel scaled(make_sis(), 2000);
    const State x0 = {1.0 / 2000.0};
    SimStats total;
    for (std::uint64_t r = 0; r < 1000; ++r) {
        RngStream rng(2026, r);
        const auto result = tau_leap_modified(scaled, x0, 50.0, {}, rng);
        for (std::size_t k = 0; k < result.path.size(); ++k) {
            const double z = result.path.state(k)[0];
            ASSERT_GE(z, 0.0);
            ASSERT_LE(z, 1.0);
        }
        total.merge(result.stats);
    }
    EXPECT_EQ(total.repair_exhausted, 0);
    EXPECT_EQ(total.domain_violations, 0);
}

TEST(TauLeap, ModifiedSivDomainInvarianceNearBoundary)
{
    const auto model = make_siv();
    const ScaledModel scaled(model, 500);
    for (const auto& x0 : {State{0.002, 0.996, 0.002}, State{0.99, 0.008, 0.002}, State{0.004, 0.002, 0.994}}) {
        for (auto repair : {RepairMode::resample, RepairMode::thinning}) {
            TauLeapConfig config;
            config.repair  = repair;
            config.epsilon = 0.2;
            for (std::uint64_t r = 0; r < 100; ++r) {
                RngStream rng(8, r);
                const auto result = tau_leap_modified(scaled, x0, 20.0, config, rng);
                for (std::size_t k = 0; k < result.path.size(); ++k) {
                    ASSERT_TRUE(model.contains(result.path.state(k)));
                }
            }
        }
    }
}

TEST(TauLeap, ExplicitFlagsButDoesNotRepair)
{
    // Large epsilon and no fallback at a tiny population: the plain scheme overshoots zero.
    const ScaledModel scaled(make_sis({1.5, 1.0}), 200);
    TauLeapConfig config;
    config.variant = TauVariant::explicit_step;
    config.epsilon = 0.9;
    config.n       = 1;
    std::int64_t violations = 0;
    for (std::uint64_t r = 0; r < 300; ++r) {
        RngStream rng(4, r);
        const State x0    = {0.02};
        const auto result = tau_leap_explicit(scaled, x0, 20.0, config, rng);
        violations += result.stats.domain_violations;
        for (std::size_t k = 0; k < result.path.size(); ++k) {
            const bool inside = scaled.base().contains(result.path.state(k));
            EXPECT_EQ(inside, !(result.path.flags[k] & Trajectory::out_of_range));
        }
    }
    EXPECT_GT(violations, 0);
}

TEST(Simulators, SameSeedSamePath)
{
    const ScaledModel scaled(make_siv(), 3000);
    const State x0 = {0.1, 0.2, 0.7};
    for (int variant = 0; variant < 6; ++variant) {
        auto run = [&](std::uint64_t stream) {
            RngStream rng(123, stream);
            TauLeapConfig config;
            switch (variant) {
            case 0:
                return ssa_direct(scaled, x0, 20.0, rng).path;
            case 1:
                config.variant = TauVariant::explicit_step;
                break;
            case 2:
                config.variant = TauVariant::implicit_rate;
                break;
            case 3:
                config.variant = TauVariant::midpoint;
                break;
            case 4:
                break;
            default:
                config.repair = RepairMode::thinning;
                config.n_c    = 200;
                break;
            }
            return tau_leap(scaled, x0, 20.0, config, rng).path;
        };
        EXPECT_TRUE(same_path(run(0), run(0))) << variant;
        EXPECT_FALSE(same_path(run(0), run(1))) << variant;
    }
}

TEST(Simulators, SampledRecordingGrid)
{
    const ScaledModel scaled(make_sis(), 1000);
    const State x0 = {0.1};
    RngStream a(1, 0), b(1, 0);
    const auto every   = ssa_direct(scaled, x0, 10.0, a);
    const auto sampled = ssa_direct(scaled, x0, 10.0, b, {0.25});
    ASSERT_EQ(sampled.path.size(), 41u);
    for (std::size_t k = 0; k < sampled.path.size(); ++k) {
        EXPECT_DOUBLE_EQ(sampled.path.times[k], 0.25 * static_cast<double>(k));
        EXPECT_EQ(sampled.path.state(k)[0], every.path.at(sampled.path.times[k])[0]);
    }
}

TEST(Ensemble, IndependentOfThreadCount)
{
    const ScaledModel scaled(make_sis(), 1000);
    SimulationSpec spec;
    spec.x0              = {0.1};
    spec.horizon         = 10.0;
    spec.sample_interval = 0.5;
    spec.simulator       = SimulatorKind::tau_leap;
    spec.keep_paths      = true;
    const auto one   = ensemble_run(scaled, spec, 37, 9, 1);
    const auto three = ensemble_run(scaled, spec, 37, 9, 3);
    EXPECT_EQ(one.mean, three.mean);
    EXPECT_EQ(one.variance, three.variance);
    EXPECT_EQ(one.min, three.min);
    EXPECT_EQ(one.max, three.max);

    // Summary statistics recomputed from the kept paths.
    ASSERT_EQ(one.paths.size(), 37u);
    for (std::size_t k = 0; k < one.times.size(); ++k) {
        double s = 0.0, s2 = 0.0;
        for (const auto& p : one.paths) {
            s += p.state(k)[0];
        }
        const double m = s / 37.0;
        for (const auto& p : one.paths) {
            s2 += (p.state(k)[0] - m) * (p.state(k)[0] - m);
        }
        EXPECT_NEAR(one.mean[k], m, 1e-15);
        EXPECT_NEAR(one.variance[k], s2 / 36.0, 1e-15);
        EXPECT_LE(one.min[k], one.mean[k] + 1e-15);
        EXPECT_GE(one.max[k], one.mean[k] - 1e-15);
    }
    EXPECT_THROW(ensemble_run(scaled, spec, 0, 9), ConfigError);
}

TEST(Ensemble, MidpointBeatsExplicitWeakError)
{
    const ScaledModel scaled(make_sis(), 2000);
    SimulationSpec spec;
    spec.x0              = {0.1};
    spec.horizon         = 10.0;
    spec.sample_interval = 10.0;
    const double reference = ensemble_run(scaled, spec, 10000, 7).mean.back();
    spec.simulator         = SimulatorKind::tau_leap;
    spec.tau.variant       = TauVariant::explicit_step;
    const double plain     = ensemble_run(scaled, spec, 10000, 8).mean.back();
    spec.tau.variant       = TauVariant::midpoint;
    const double midpoint  = ensemble_run(scaled, spec, 10000, 8).mean.back();
    EXPECT_LT(std::abs(midpoint - reference), std::abs(plain - reference));
}

double ode_value(const CompartmentalModel& model, const State& x0, double t, std::size_t i)
{
    NSFDConfig config;
    config.h       = 0.001;
    config.horizon = t;
    config.initial = x0;
    return nsfd_integrate(model, config).back()[i];
}

TEST(Ensemble, SisLawOfLargeNumbers)
{
    const auto model = make_sis();
    const State x0   = {0.1};
    NSFDConfig config;
    config.h       = 0.001;
    config.horizon = 50.0;
    config.initial = x0;
    const auto ode = nsfd_integrate(model, config);

    SimulationSpec spec;
    spec.x0              = x0;
    spec.horizon         = 50.0;
    spec.sample_interval = 0.5;
    auto sup_gap = [&](const EnsembleSummary& e) {
        double gap = 0.0;
        for (std::size_t k = 0; k < e.times.size(); ++k) {
            gap = std::max(gap, std::abs(e.mean_at(k, 0) - ode.at(e.times[k] + 1e-9)[0]));
        }
        return gap;
    };
    const auto small = ensemble_run(ScaledModel(model, 2000), spec, 500, 2026);
    const auto large = ensemble_run(ScaledModel(model, 20000), spec, 500, 2026);
    EXPECT_LT(sup_gap(large), sup_gap(small));

    // Mean at T within three standard errors of the limit.
    const double limit = ode_value(model, x0, 50.0, 0);
    EXPECT_NEAR(small.mean.back(), limit, 3.0 * std::sqrt(small.variance.back() / 500.0));

    // Modified tau-leaping against the exact ensemble at the larger population.
    spec.simulator    = SimulatorKind::tau_leap;
    const auto leaped = ensemble_run(ScaledModel(model, 20000), spec, 500, 77);
    const double se   = std::sqrt((large.variance.back() + leaped.variance.back()) / 500.0);
    EXPECT_NEAR(leaped.mean.back(), large.mean.back(), 3.0 * se);
}

} // namespace
