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
#include "epildp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace epildp
{

double phi(PhiChoice choice, double z)
{
    switch (choice) {
    case PhiChoice::one_minus_exp:
        return -std::expm1(-z);
    case PhiChoice::rational:
        return z / (1.0 + z * z);
    }
    return z;
}

double DenominatorFunction::operator()(double h) const
{
    return epildp::phi(phi, q * h) / q;
}

double compute_q(const std::vector<std::complex<double>>& eigenvalues)
{
    double q = 0.0;
    for (const auto& lambda : eigenvalues) {
        const double re = std::abs(lambda.real());
        if (re < 1e-9) {
            throw NonHyperbolic("eigenvalue with vanishing real part");
        }
        q = std::max(q, std::norm(lambda) / (2.0 * re));
    }
    return q;
}

double compute_q(const CompartmentalModel& model, const std::vector<Equilibrium>& equilibria)
{
    std::vector<std::complex<double>> all;
    for (const auto& eq : equilibria) {
        if (!eq.eigenvalues.empty()) {
            all.insert(all.end(), eq.eigenvalues.begin(), eq.eigenvalues.end());
            continue;
        }
        Eigen::EigenSolver<Eigen::MatrixXd> solver(tangent_jacobian(model, eq.point), false);
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
            all.push_back(solver.eigenvalues()[i]);
        }
    }
    if (all.empty()) {
        throw NonHyperbolic("no equilibria to bound Q");
    }
    return compute_q(all);
}

namespace
{

void nsfd_step_into(const MetzlerForm& form, double psi_h, std::span<const double> z, std::span<double> a,
                    std::span<double> out)
{
    const std::size_t d = form.f.size();
    form.matrix(z, a);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            a[r * d + c] = (r == c ? 1.0 : 0.0) - psi_h * a[r * d + c];
        }
        out[r] = z[r] + psi_h * form.f[r];
    }
    solve_in_place(a, out);
}

std::size_t step_count(double h, double horizon)
{
    if (!(h > 0.0) || !(horizon > 0.0)) {
        throw ConfigError("step size and horizon must be positive");
    }
    return static_cast<std::size_t>(std::floor(horizon / h + 1e-9));
}

double resolve_q(const CompartmentalModel& model, const std::optional<double>& q)
{
    if (q) {
        if (!(*q > 0.0)) {
            throw ConfigError("Q must be positive");
        }
        return *q;
    }
    return compute_q(model, find_equilibria(model, default_seeds(model)).equilibria);
}

} // namespace

State nsfd_step(const MetzlerForm& form, double psi_h, std::span<const double> z)
{
    const std::size_t d = form.f.size();
    std::vector<double> a(d * d);
    State out(d);
    nsfd_step_into(form, psi_h, z, a, out);
    return out;
}

Trajectory nsfd_integrate(const CompartmentalModel& model, const NSFDConfig& config)
{
    if (!model.metzler()) {
        throw ConfigError("model '" + model.name() + "' has no Metzler form");
    }
    if (!model.contains(config.initial)) {
        throw DomainError("initial state outside the model domain");
    }
    const std::size_t steps = step_count(config.h, config.horizon);
    const DenominatorFunction psi{resolve_q(model, config.q), config.phi};
    const double psi_h  = psi(config.h);
    const auto& form    = *model.metzler();
    const std::size_t d = model.dimension();

    Trajectory path(d, TrajectorySource::nsfd);
    path.times.reserve(steps + 1);
    path.states.reserve((steps + 1) * d);
    State z = config.initial;
    State next(d);
    std::vector<double> a(d * d);
    path.push_back(0.0, z);
    for (std::size_t m = 1; m <= steps; ++m) {
        nsfd_step_into(form, psi_h, z, a, next);
        std::swap(z, next);
        path.push_back(static_cast<double>(m) * config.h, z);
    }
    return path;
}

Trajectory explicit_integrate(const CompartmentalModel& model, double h, double horizon, std::span<const double> initial)
{
    const std::size_t steps = step_count(h, horizon);
    const std::size_t d     = model.dimension();
    Trajectory path(d, TrajectorySource::explicit_euler);
    State z(initial.begin(), initial.end());
    State b(d);
    path.push_back(0.0, z);
    for (std::size_t m = 1; m <= steps; ++m) {
        drift_unchecked(model, z, b);
        for (std::size_t i = 0; i < d; ++i) {
            z[i] += h * b[i];
        }
        path.push_back(static_cast<double>(m) * h, z, model.contains(z) ? Trajectory::none : Trajectory::out_of_range);
    }
    return path;
}

double sis_exact(double x, double beta, double gamma, double t, RiccatiBranch branch)
{
    if (beta == gamma) {
        const double denom = branch == RiccatiBranch::corrected ? 1.0 + beta * x * t : 1.0 - beta * x * t;
        if (!(denom > 0.0)) {
            throw Blowup("Riccati solution has a non-positive denominator");
        }
        return x / denom;
    }
    const double r = beta - gamma;
    if (r > 0.0) {
        // Divided through by exp(r t) to avoid overflow.
        const double decay = std::exp(-r * t);
        const double denom = r * decay - beta * x * std::expm1(-r * t);
        if (!(denom > 0.0)) {
            throw Blowup("Riccati solution has a non-positive denominator");
        }
        return r * x / denom;
    }
    const double growth = std::exp(r * t);
    const double denom  = r + beta * x * std::expm1(r * t);
    if (denom == 0.0 || (denom > 0.0) != (r > 0.0)) {
        throw Blowup("Riccati solution has a non-positive denominator");
    }
    return r * x * growth / denom;
}

AttractorClassifier::AttractorClassifier(const CompartmentalModel& model, ClassifyConfig config)
    : AttractorClassifier(model, find_equilibria(model, default_seeds(model)).equilibria, config)
{
}

AttractorClassifier::AttractorClassifier(const CompartmentalModel& model, std::vector<Equilibrium> equilibria,
                                         ClassifyConfig config)
    : m_model(&model)
    , m_equilibria(std::move(equilibria))
    , m_config(config)
{
    if (!model.metzler()) {
        throw ConfigError("model '" + model.name() + "' has no Metzler form");
    }
    const double q = config.q ? *config.q : compute_q(model, m_equilibria);
    m_psi_h        = DenominatorFunction{q, config.phi}(config.h);
}

Attractor AttractorClassifier::classify(std::span<const double> z0) const
{
    if (!m_model->contains(z0)) {
        throw DomainError("classification start outside the model domain");
    }
    const auto& form    = *m_model->metzler();
    const std::size_t d = m_model->dimension();
    State z(z0.begin(), z0.end());
    State next(d);
    std::vector<double> a(d * d);
    const double tol2 = m_config.tolerance * m_config.tolerance;
    double t          = 0.0;
    while (true) {
        for (std::size_t e = 0; e < m_equilibria.size(); ++e) {
            if (m_equilibria[e].stability != Stability::stable) {
                continue;
            }
            double dist2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double diff = z[i] - m_equilibria[e].point[i];
                dist2 += diff * diff;
            }
            if (dist2 < tol2) {
                return {e, t};
            }
        }
        if (t > m_config.t_max) {
            return {std::nullopt, t};
        }
        nsfd_step_into(form, m_psi_h, z, a, next);
        std::swap(z, next);
        t += m_config.h;
    }
}

Attractor classify_attractor(const CompartmentalModel& model, std::span<const double> z0, const ClassifyConfig& config)
{
    return AttractorClassifier(model, config).classify(z0);
}

std::vector<BoundaryPoint> characteristic_boundary(const CompartmentalModel& model, const BoundaryConfig& config)
{
    const auto search = find_equilibria(model, default_seeds(model));
    if (model.dimension() == 1) {
        std::vector<BoundaryPoint> points;
        for (const auto& eq : search.equilibria) {
            if (eq.stability == Stability::unstable) {
                points.push_back({eq.point[0], 0.0});
            }
        }
        return points;
    }
    const auto stable = std::count_if(search.equilibria.begin(), search.equilibria.end(), [](const auto& eq) {
        return eq.stability == Stability::stable;
    });
    if (stable < 2) {
        throw NotBistable("characteristic boundary needs two stable equilibria");
    }
    const std::size_t d = model.dimension();
    if (config.scan_coordinate >= d || config.line_coordinate >= d ||
        config.scan_coordinate == config.line_coordinate) {
        throw ConfigError("invalid boundary axes");
    }
    const auto& domain = model.domain();
    const auto dep     = model.dependent();
    if (dep && (*dep == config.scan_coordinate || *dep == config.line_coordinate)) {
        throw ConfigError("boundary axes must not include the dependent coordinate");
    }

    const AttractorClassifier classifier(model, search.equilibria, config.classify);

    auto make_state = [&](double scan, double line) {
        State z(d);
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            z[i] = std::isfinite(domain.lower[i]) ? domain.lower[i] : 0.0;
        }
        z[config.scan_coordinate] = scan;
        z[config.line_coordinate] = line;
        for (std::size_t i = 0; i < d; ++i) {
            if (!dep || i != *dep) {
                sum += z[i];
            }
        }
        if (dep) {
            z[*dep] = 1.0 - sum;
        }
        return z;
    };

    std::vector<std::optional<BoundaryPoint>> results(config.lines.size());
    auto process_line = [&](std::size_t index) {
        const double line = config.lines[index];
        double lo         = domain.lower[config.scan_coordinate];
        double hi         = domain.upper[config.scan_coordinate];
        if (domain.sum != SumConstraint::none) {
            double others = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                if (i != config.scan_coordinate && (!dep || i != *dep)) {
                    others += i == config.line_coordinate ? line : domain.lower[i];
                }
            }
            hi = std::min(hi, 1.0 - others);
        }
        if (!(hi > lo)) {
            return;
        }
        auto z_lo = make_state(lo, line);
        auto z_hi = make_state(hi, line);
        if (!model.contains(z_lo) || !model.contains(z_hi)) {
            return;
        }
        const auto a_lo = classifier.classify(z_lo);
        const auto a_hi = classifier.classify(z_hi);
        if (!a_lo.index || !a_hi.index || *a_lo.index == *a_hi.index) {
            return;
        }
        for (int it = 0; it < config.iterations; ++it) {
            const double mid  = 0.5 * (lo + hi);
            const auto a_mid  = classifier.classify(make_state(mid, line));
            if (!a_mid.index) {
                lo = hi = mid;
                break;
            }
            if (*a_mid.index == *a_lo.index) {
                lo = mid;
            }
            else {
                hi = mid;
            }
        }
        results[index] = BoundaryPoint{0.5 * (lo + hi), line};
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.lines.size())));
    if (threads <= 1) {
        for (std::size_t i = 0; i < config.lines.size(); ++i) {
            process_line(i);
        }
    }
    else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < config.lines.size(); i += threads) {
                    process_line(i);
                }
            });
        }
        for (auto& worker : pool) {
            worker.join();
        }
    }

    std::vector<BoundaryPoint> points;
    for (const auto& r : results) {
        if (r) {
            points.push_back(*r);
        }
    }
    return points;
}

} // namespace epildp
