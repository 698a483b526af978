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
#include "epildp/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace epildp
{

using Terms = std::vector<Monomial>;

namespace
{

double int_power(double base, int exponent)
{
    double result = 1.0;
    for (int e = 0; e < exponent; ++e) {
        result *= base;
    }
    return result;
}

} // namespace

Polynomial::Polynomial(std::vector<Monomial> terms)
    : m_terms(std::move(terms))
{
    for (const auto& term : m_terms) {
        for (int e : term.exponents) {
            if (e < 0) {
                throw ConfigError("polynomial exponents must be non-negative");
            }
        }
    }
}

double Polynomial::operator()(std::span<const double> z) const
{
    double sum = 0.0;
    for (const auto& term : m_terms) {
        double value = term.coefficient;
        for (std::size_t i = 0; i < term.exponents.size(); ++i) {
            value *= int_power(z[i], term.exponents[i]);
        }
        sum += value;
    }
    return sum;
}

double Polynomial::derivative(std::span<const double> z, std::size_t i) const
{
    double sum = 0.0;
    for (const auto& term : m_terms) {
        if (i >= term.exponents.size() || term.exponents[i] == 0) {
            continue;
        }
        double value = term.coefficient * term.exponents[i];
        for (std::size_t c = 0; c < term.exponents.size(); ++c) {
            value *= int_power(z[c], c == i ? term.exponents[c] - 1 : term.exponents[c]);
        }
        sum += value;
    }
    return sum;
}

RateFunction::RateFunction(Polynomial polynomial)
    : m_polynomial(std::move(polynomial))
{
}

RateFunction::RateFunction(RateCallback callback)
    : m_callback(std::move(callback))
{
    if (!m_callback) {
        throw ConfigError("empty rate callback");
    }
}

double RateFunction::operator()(std::span<const double> z) const
{
    return m_polynomial ? (*m_polynomial)(z) : m_callback(z);
}

double RateFunction::derivative(std::span<const double> z, std::size_t i) const
{
    if (m_polynomial) {
        return m_polynomial->derivative(z, i);
    }
    State shifted(z.begin(), z.end());
    const double step = 1e-6 * std::max(1.0, std::abs(z[i]));
    shifted[i]        = z[i] + step;
    const double up   = m_callback(shifted);
    shifted[i]        = z[i] - step;
    const double down = m_callback(shifted);
    return (up - down) / (2.0 * step);
}

bool Domain::contains(std::span<const double> z, double tol) const
{
    if (z.size() != lower.size()) {
        return false;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!std::isfinite(z[i]) || z[i] < lower[i] - tol || z[i] > upper[i] + tol) {
            return false;
        }
        total += z[i];
    }
    switch (sum) {
    case SumConstraint::none:
        return true;
    case SumConstraint::at_most_one:
        return total <= 1.0 + tol;
    case SumConstraint::equal_one:
        return std::abs(total - 1.0) <= tol * static_cast<double>(z.size());
    }
    return true;
}

Eigen::MatrixXd MetzlerForm::evaluate(std::span<const double> z) const
{
    const auto d = static_cast<Eigen::Index>(f.size());
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a(d, d);
    matrix(z, std::span<double>(a.data(), static_cast<std::size_t>(d * d)));
    return a;
}

CompartmentalModel::CompartmentalModel(ModelDefinition definition)
    : m_def(std::move(definition))
{
    const std::size_t d = m_def.compartments.size();
    if (d == 0) {
        throw ConfigError("model '" + m_def.name + "' has no compartments");
    }
    if (m_def.jumps.empty()) {
        throw ConfigError("model '" + m_def.name + "' has no jumps");
    }
    if (m_def.domain.lower.size() != d || m_def.domain.upper.size() != d) {
        throw ConfigError("domain bounds must have one entry per compartment");
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (!(m_def.domain.lower[i] <= m_def.domain.upper[i])) {
            throw ConfigError("domain lower bound exceeds upper bound");
        }
    }
    m_directions.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m_def.jumps.size()));
    for (std::size_t j = 0; j < m_def.jumps.size(); ++j) {
        const auto& h = m_def.jumps[j].direction;
        if (h.size() != d) {
            throw ConfigError("jump " + std::to_string(j) + " has wrong direction length");
        }
        if (std::all_of(h.begin(), h.end(), [](int v) {
                return v == 0;
            })) {
            throw ConfigError("jump " + std::to_string(j) + " has a zero direction");
        }
        for (std::size_t i = 0; i < d; ++i) {
            m_directions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h[i];
        }
        if (const auto* poly = m_def.jumps[j].rate.polynomial()) {
            for (const auto& term : poly->terms()) {
                if (term.exponents.size() != d) {
                    throw ConfigError("jump " + std::to_string(j) + " has a monomial of wrong arity");
                }
            }
        }
    }
    for (auto i : m_def.infected) {
        if (i >= d) {
            throw ConfigError("infected coordinate out of range");
        }
    }
    if (m_def.domain.sum == SumConstraint::equal_one) {
        if (!m_def.dependent || *m_def.dependent >= d) {
            throw ConfigError("a sum-equals-one domain needs a valid dependent coordinate");
        }
    }
    else {
        m_def.dependent.reset();
    }
    if (m_def.metzler) {
        if (m_def.metzler->f.size() != d || !m_def.metzler->matrix) {
            throw ConfigError("Metzler form has wrong dimension");
        }
    }
}

double CompartmentalModel::parameter(const std::string& key) const
{
    auto it = m_def.parameters.find(key);
    if (it == m_def.parameters.end()) {
        throw ConfigError("model '" + m_def.name + "' has no parameter '" + key + "'");
    }
    return it->second;
}

bool CompartmentalModel::all_rates_polynomial() const
{
    return std::all_of(m_def.jumps.begin(), m_def.jumps.end(), [](const Jump& j) {
        return j.rate.is_polynomial();
    });
}

void CompartmentalModel::rates(std::span<const double> z, std::span<double> out) const
{
    for (std::size_t j = 0; j < m_def.jumps.size(); ++j) {
        out[j] = m_def.jumps[j].rate(z);
    }
}

std::vector<double> CompartmentalModel::rates(std::span<const double> z) const
{
    std::vector<double> out(jump_count());
    rates(z, out);
    return out;
}

ScaledModel::ScaledModel(CompartmentalModel model, std::int64_t population)
    : m_model(std::move(model))
    , m_population(population)
{
    if (population <= 0) {
        throw ConfigError("population size must be positive");
    }
}

double ScaledModel::propensities(std::span<const double> z, std::span<double> out) const
{
    m_model.rates(z, out);
    const double n = static_cast<double>(m_population);
    double total   = 0.0;
    for (auto& a : out) {
        a = std::max(0.0, a) * n;
        total += a;
    }
    return total;
}

std::string to_string(TrajectorySource source)
{
    switch (source) {
    case TrajectorySource::nsfd:
        return "nsfd";
    case TrajectorySource::explicit_euler:
        return "explicit";
    case TrajectorySource::exact:
        return "exact";
    case TrajectorySource::ssa:
        return "ssa";
    case TrajectorySource::tau_leap:
        return "tau_leap";
    case TrajectorySource::optimal_control:
        return "optimal_control";
    }
    return "unknown";
}

std::string to_string(Stability stability)
{
    switch (stability) {
    case Stability::stable:
        return "stable";
    case Stability::unstable:
        return "unstable";
    case Stability::non_hyperbolic:
        return "non_hyperbolic";
    }
    return "unknown";
}

std::string to_string(EquilibriumKind kind)
{
    return kind == EquilibriumKind::disease_free ? "disease_free" : "endemic";
}

void Trajectory::push_back(double t, std::span<const double> z, std::uint8_t flag)
{
    times.push_back(t);
    states.insert(states.end(), z.begin(), z.end());
    flags.push_back(flag);
}

std::span<const double> Trajectory::at(double t) const
{
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) {
        return state(0);
    }
    return state(static_cast<std::size_t>(std::distance(times.begin(), it)) - 1);
}

void drift_unchecked(const CompartmentalModel& model, std::span<const double> z, std::span<double> out)
{
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < model.jump_count(); ++j) {
        const auto& jump  = model.jumps()[j];
        const double rate = jump.rate(z);
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] += jump.direction[i] * rate;
        }
    }
}

State drift(const CompartmentalModel& model, std::span<const double> z)
{
    if (!model.contains(z)) {
        throw DomainError("drift evaluated outside the model domain");
    }
    State out(model.dimension());
    drift_unchecked(model, z, out);
    return out;
}

Eigen::MatrixXd rate_jacobian(const CompartmentalModel& model, std::span<const double> z)
{
    const auto k = static_cast<Eigen::Index>(model.jump_count());
    const auto d = static_cast<Eigen::Index>(model.dimension());
    Eigen::MatrixXd jac(k, d);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            jac(j, i) = model.jumps()[static_cast<std::size_t>(j)].rate.derivative(z, static_cast<std::size_t>(i));
        }
    }
    return jac;
}

Eigen::MatrixXd rate_jacobian(const ScaledModel& model, std::span<const double> z)
{
    return rate_jacobian(model.base(), z) * static_cast<double>(model.population());
}

Eigen::MatrixXd rate_jacobian_fd(const CompartmentalModel& model, std::span<const double> z)
{
    const auto k = static_cast<Eigen::Index>(model.jump_count());
    const auto d = static_cast<Eigen::Index>(model.dimension());
    Eigen::MatrixXd jac(k, d);
    State shifted(z.begin(), z.end());
    std::vector<double> up(model.jump_count()), down(model.jump_count());
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto ui     = static_cast<std::size_t>(i);
        const double step = 1e-6 * std::max(1.0, std::abs(z[ui]));
        shifted[ui]       = z[ui] + step;
        model.rates(shifted, up);
        shifted[ui] = z[ui] - step;
        model.rates(shifted, down);
        shifted[ui] = z[ui];
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            jac(j, i)     = (up[uj] - down[uj]) / (2.0 * step);
        }
    }
    return jac;
}

Eigen::MatrixXd drift_jacobian(const CompartmentalModel& model, std::span<const double> z)
{
    return model.direction_matrix() * rate_jacobian(model, z);
}

namespace
{

std::vector<std::size_t> free_coordinates(const CompartmentalModel& model)
{
    std::vector<std::size_t> coords;
    for (std::size_t i = 0; i < model.dimension(); ++i) {
        if (!model.dependent() || *model.dependent() != i) {
            coords.push_back(i);
        }
    }
    return coords;
}

} // namespace

Eigen::MatrixXd tangent_jacobian(const CompartmentalModel& model, std::span<const double> z)
{
    const Eigen::MatrixXd full = drift_jacobian(model, z);
    if (!model.dependent()) {
        return full;
    }
    const auto dep    = static_cast<Eigen::Index>(*model.dependent());
    const auto coords = free_coordinates(model);
    const auto m      = static_cast<Eigen::Index>(coords.size());
    Eigen::MatrixXd reduced(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            const auto ra = static_cast<Eigen::Index>(coords[static_cast<std::size_t>(a)]);
            const auto cb = static_cast<Eigen::Index>(coords[static_cast<std::size_t>(b)]);
            reduced(a, b) = full(ra, cb) - full(ra, dep);
        }
    }
    return reduced;
}

Stability classify_stability(const std::vector<std::complex<double>>& eigenvalues)
{
    bool any_positive = false;
    for (const auto& lambda : eigenvalues) {
        if (std::abs(lambda.real()) < 1e-9) {
            return Stability::non_hyperbolic;
        }
        any_positive = any_positive || lambda.real() > 0.0;
    }
    return any_positive ? Stability::unstable : Stability::stable;
}

namespace
{

std::vector<std::complex<double>> eigenvalues_of(const Eigen::MatrixXd& m)
{
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    std::vector<std::complex<double>> out;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        out.push_back(solver.eigenvalues()[i]);
    }
    std::sort(out.begin(), out.end(), [](auto a, auto b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

State from_free(const CompartmentalModel& model, const std::vector<std::size_t>& coords, const Eigen::VectorXd& w)
{
    State z(model.dimension(), 0.0);
    double sum = 0.0;
    for (std::size_t a = 0; a < coords.size(); ++a) {
        z[coords[a]] = w[static_cast<Eigen::Index>(a)];
        sum += z[coords[a]];
    }
    if (model.dependent()) {
        z[*model.dependent()] = 1.0 - sum;
    }
    return z;
}

Eigen::VectorXd free_residual(const CompartmentalModel& model, const std::vector<std::size_t>& coords, const State& z)
{
    State b(model.dimension());
    drift_unchecked(model, z, b);
    Eigen::VectorXd r(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t a = 0; a < coords.size(); ++a) {
        r[static_cast<Eigen::Index>(a)] = b[coords[a]];
    }
    return r;
}

} // namespace

EquilibriumSearch find_equilibria(const CompartmentalModel& model, const std::vector<State>& seeds)
{
    constexpr int max_iterations = 200;
    const auto coords            = free_coordinates(model);
    EquilibriumSearch result;
    std::vector<State> roots;

    for (const auto& seed : seeds) {
        if (!model.contains(seed)) {
            throw DomainError("equilibrium seed outside the model domain");
        }
        Eigen::VectorXd w(static_cast<Eigen::Index>(coords.size()));
        for (std::size_t a = 0; a < coords.size(); ++a) {
            w[static_cast<Eigen::Index>(a)] = seed[coords[a]];
        }
        State z           = from_free(model, coords, w);
        Eigen::VectorXd r = free_residual(model, coords, z);
        bool converged    = false;

        for (int it = 0; it < max_iterations && !converged; ++it) {
            if (r.lpNorm<Eigen::Infinity>() == 0.0) {
                converged = true;
                break;
            }
            const Eigen::MatrixXd jac = tangent_jacobian(model, z);
            const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);
            if (!step.allFinite()) {
                break;
            }
            // Backtracking on the residual norm.
            double s = 1.0;
            Eigen::VectorXd w_new;
            Eigen::VectorXd r_new;
            State z_new;
            for (int bt = 0; bt < 40; ++bt) {
                w_new = w + s * step;
                z_new = from_free(model, coords, w_new);
                r_new = free_residual(model, coords, z_new);
                if (r_new.norm() < (1.0 - 1e-4 * s) * r.norm()) {
                    break;
                }
                s *= 0.5;
            }
            const double moved = (w_new - w).lpNorm<Eigen::Infinity>();
            w                  = w_new;
            z                  = z_new;
            r                  = r_new;
            if (moved <= 1e-12 && r.lpNorm<Eigen::Infinity>() <= 1e-10) {
                converged = true;
            }
        }
        if (!converged) {
            result.failed_seeds.push_back(seed);
            continue;
        }
        // Clean signed zeros from coordinates pinned at a bound.
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (std::abs(z[i] - model.domain().lower[i]) < 1e-14) {
                z[i] = model.domain().lower[i];
            }
        }
        if (!model.domain().contains(z, 1e-9)) {
            continue;
        }
        const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const State& other) {
            double dist = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) {
                dist = std::max(dist, std::abs(z[i] - other[i]));
            }
            return dist < 1e-8;
        });
        if (!duplicate) {
            roots.push_back(z);
        }
    }

    std::sort(roots.begin(), roots.end());
    for (auto& z : roots) {
        Equilibrium eq;
        eq.eigenvalues = eigenvalues_of(tangent_jacobian(model, z));
        eq.stability   = classify_stability(eq.eigenvalues);
        const bool free_of_disease =
            !model.infected().empty() && std::all_of(model.infected().begin(), model.infected().end(), [&](auto i) {
                return std::abs(z[i]) <= 1e-9;
            });
        eq.kind  = free_of_disease ? EquilibriumKind::disease_free : EquilibriumKind::endemic;
        eq.point = std::move(z);
        result.equilibria.push_back(std::move(eq));
    }
    return result;
}

std::vector<State> default_seeds(const CompartmentalModel& model)
{
    const auto coords   = free_coordinates(model);
    const auto& domain  = model.domain();
    const int per_axis  = coords.size() <= 2 ? 11 : 5;
    std::vector<State> seeds;
    std::vector<int> index(coords.size(), 0);
    while (true) {
        Eigen::VectorXd w(static_cast<Eigen::Index>(coords.size()));
        for (std::size_t a = 0; a < coords.size(); ++a) {
            double lo = domain.lower[coords[a]];
            double hi = domain.upper[coords[a]];
            if (!std::isfinite(lo)) {
                lo = -1.0;
            }
            if (!std::isfinite(hi)) {
                hi = lo + 2.0;
            }
            w[static_cast<Eigen::Index>(a)] = lo + (hi - lo) * index[a] / (per_axis - 1);
        }
        State z = from_free(model, coords, w);
        if (model.contains(z)) {
            seeds.push_back(std::move(z));
        }
        std::size_t a = 0;
        while (a < index.size() && ++index[a] == per_axis) {
            index[a++] = 0;
        }
        if (a == index.size()) {
            break;
        }
    }
    return seeds;
}

SisParameters sis_parameters(const CompartmentalModel& model)
{
    return {model.parameter("beta"), model.parameter("gamma")};
}

SivParameters siv_parameters(const CompartmentalModel& model)
{
    SivParameters p;
    p.beta  = model.parameter("beta");
    p.gamma = model.parameter("gamma");
    p.eta   = model.parameter("eta");
    p.theta = model.parameter("theta");
    p.mu    = model.parameter("mu");
    p.sigma = model.parameter("sigma");
    return p;
}

std::optional<MetzlerForm> derive_metzler_form(const std::vector<Jump>& jumps, std::size_t dimension)
{
    struct Entry {
        std::size_t row;
        std::size_t col; ///< == dimension for the constant vector
        Monomial term;
    };
    std::vector<Entry> entries;
    std::vector<double> f(dimension, 0.0);
    for (const auto& jump : jumps) {
        const Polynomial* poly = jump.rate.polynomial();
        if (poly == nullptr) {
            return std::nullopt;
        }
        for (const auto& mono : poly->terms()) {
            for (std::size_t i = 0; i < dimension; ++i) {
                const double c = jump.direction[i] * mono.coefficient;
                if (c == 0.0) {
                    continue;
                }
                const auto& e = mono.exponents;
                std::optional<std::size_t> col;
                if (c > 0.0) {
                    for (std::size_t k = 0; k < dimension && !col; ++k) {
                        if (k != i && e[k] > 0 && jump.direction[k] < 0) {
                            col = k;
                        }
                    }
                    for (std::size_t k = 0; k < dimension && !col; ++k) {
                        if (k != i && e[k] > 0) {
                            col = k;
                        }
                    }
                }
                if (!col && e[i] > 0) {
                    col = i;
                }
                if (!col) {
                    if (c < 0.0 || std::any_of(e.begin(), e.end(), [](int x) { return x != 0; })) {
                        return std::nullopt;
                    }
                    f[i] += c;
                    continue;
                }
                Monomial reduced{c, e};
                --reduced.exponents[*col];
                entries.push_back({i, *col, std::move(reduced)});
            }
        }
    }
    MetzlerForm form;
    form.f      = std::move(f);
    form.matrix = [entries = std::move(entries), dimension](std::span<const double> z, std::span<double> a) {
        std::fill(a.begin(), a.end(), 0.0);
        for (const auto& entry : entries) {
            double value = entry.term.coefficient;
            for (std::size_t k = 0; k < dimension; ++k) {
                for (int p = 0; p < entry.term.exponents[k]; ++p) {
                    value *= z[k];
                }
            }
            a[entry.row * dimension + entry.col] += value;
        }
    };
    return form;
}

CompartmentalModel make_sis(const SisParameters& params)
{
    if (!(params.beta > 0.0) || !(params.gamma > 0.0)) {
        throw ConfigError("SIS parameters must be positive");
    }
    const double beta  = params.beta;
    const double gamma = params.gamma;

    ModelDefinition def;
    def.name         = "sis";
    def.compartments = {"I"};
    def.jumps.push_back({{+1}, Polynomial(Terms{{beta, {1}}, {-beta, {2}}}), "infection"});
    def.jumps.push_back({{-1}, Polynomial(Terms{{gamma, {1}}}), "recovery"});
    def.domain     = {{0.0}, {1.0}, SumConstraint::at_most_one};
    def.parameters = {{"beta", beta}, {"gamma", gamma}};
    def.infected   = {0};

    MetzlerForm metzler;
    metzler.f      = {0.0};
    metzler.matrix = [beta, gamma](std::span<const double> z, std::span<double> a) {
        a[0] = -beta * z[0] + beta - gamma;
    };
    def.metzler = std::move(metzler);
    return CompartmentalModel(std::move(def));
}

CompartmentalModel make_siv(const SivParameters& p, SivJumpTable table)
{
    if (!(p.beta > 0.0 && p.gamma > 0.0 && p.eta >= 0.0 && p.theta >= 0.0 && p.mu >= 0.0 && p.sigma >= 0.0 &&
          p.sigma <= 1.0)) {
        throw ConfigError("SIV parameters out of range");
    }
    // Coordinates: 0 = S, 1 = V, 2 = I.
    ModelDefinition def;
    def.name         = table == SivJumpTable::consistent ? "siv" : "siv_printed";
    def.compartments = {"S", "V", "I"};
    def.jumps.push_back({{-1, 0, +1}, Polynomial(Terms{{p.beta, {1, 0, 1}}}), "infection_of_susceptible"});
    def.jumps.push_back({{0, -1, +1}, Polynomial(Terms{{p.sigma * p.beta, {0, 1, 1}}}), "infection_of_vaccinated"});
    def.jumps.push_back({{+1, 0, -1}, Polynomial(Terms{{p.gamma, {0, 0, 1}}}), "recovery"});
    const int waning = table == SivJumpTable::consistent ? +1 : -1;
    def.jumps.push_back({{waning, -waning, 0}, Polynomial(Terms{{p.theta, {0, 1, 0}}}), "loss_of_protection"});
    def.jumps.push_back({{-waning, waning, 0}, Polynomial(Terms{{p.eta, {1, 0, 0}}}), "vaccination"});
    def.jumps.push_back({{+1, 0, -1}, Polynomial(Terms{{p.mu, {0, 0, 1}}}), "death_of_infected"});
    def.jumps.push_back({{+1, -1, 0}, Polynomial(Terms{{p.mu, {0, 1, 0}}}), "death_of_vaccinated"});
    def.domain     = {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, SumConstraint::equal_one};
    def.parameters = {{"beta", p.beta}, {"gamma", p.gamma}, {"eta", p.eta},
                      {"theta", p.theta}, {"mu", p.mu},     {"sigma", p.sigma}};
    def.infected   = {2};
    def.dependent  = 0;
    if (table == SivJumpTable::as_printed) {
        return CompartmentalModel(std::move(def));
    }

    MetzlerForm metzler;
    metzler.f      = {p.mu, 0.0, 0.0};
    metzler.matrix = [p](std::span<const double> z, std::span<double> a) {
        const double infected = z[2];
        a[0]                  = -p.beta * infected - p.mu - p.eta;
        a[1]                  = p.theta;
        a[2]                  = p.gamma;
        a[3]                  = p.eta;
        a[4]                  = -p.sigma * p.beta * infected - p.theta - p.mu;
        a[5]                  = 0.0;
        a[6]                  = p.beta * infected;
        a[7]                  = p.sigma * p.beta * infected;
        a[8]                  = -p.mu - p.gamma;
    };
    def.metzler = std::move(metzler);
    return CompartmentalModel(std::move(def));
}

CompartmentalModel make_builtin(const std::string& name, const std::map<std::string, double>& overrides)
{
    auto check_keys = [&](std::initializer_list<const char*> known) {
        for (const auto& [key, value] : overrides) {
            if (std::none_of(known.begin(), known.end(), [&](const char* k) {
                    return key == k;
                })) {
                throw ConfigError("unknown parameter '" + key + "' for model '" + name + "'");
            }
        }
    };
    auto get = [&](const char* key, double fallback) {
        auto it = overrides.find(key);
        return it == overrides.end() ? fallback : it->second;
    };
    if (name == "sis") {
        check_keys({"beta", "gamma"});
        SisParameters p;
        p.beta  = get("beta", p.beta);
        p.gamma = get("gamma", p.gamma);
        return make_sis(p);
    }
    if (name == "siv" || name == "siv_printed") {
        check_keys({"beta", "gamma", "eta", "theta", "mu", "sigma"});
        SivParameters p;
        p.beta  = get("beta", p.beta);
        p.gamma = get("gamma", p.gamma);
        p.eta   = get("eta", p.eta);
        p.theta = get("theta", p.theta);
        p.mu    = get("mu", p.mu);
        p.sigma = get("sigma", p.sigma);
        return make_siv(p, name == "siv" ? SivJumpTable::consistent : SivJumpTable::as_printed);
    }
    throw ConfigError("unknown built-in model '" + name + "'");
}

ReproductionNumbers basic_reproduction_number(const SivParameters& p)
{
    const double without = p.beta / (p.mu + p.gamma);
    const double r0      = without * (p.mu + p.theta + p.sigma * p.eta) / (p.mu + p.theta + p.eta);
    return {r0, without};
}

std::array<double, 2> siv_reduced_view(std::span<const double> z)
{
    return {z[2], z[1]};
}

State siv_full_state(double infected, double vaccinated)
{
    return {1.0 - infected - vaccinated, vaccinated, infected};
}

} // namespace epildp
