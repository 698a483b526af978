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
#include "epildp/lagrangian.hpp"
#include "epildp/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace epildp
{

double ell(const CompartmentalModel& model, std::span<const double> x, std::span<const double> p,
           std::span<const double> y)
{
    const auto rates = model.rates(x);
    double value     = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        value += p[i] * y[i];
    }
    for (std::size_t j = 0; j < rates.size(); ++j) {
        double ph = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            ph += p[i] * model.direction(i, j);
        }
        value -= rates[j] * std::expm1(ph);
    }
    return value;
}

double ell_tilde(std::span<const double> mu, std::span<const double> beta)
{
    double value = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j) {
        if (mu[j] < 0.0) {
            return infinite_cost;
        }
        if (beta[j] <= 0.0) {
            if (mu[j] > 0.0) {
                return infinite_cost;
            }
            continue;
        }
        value += beta[j] - mu[j];
        if (mu[j] > 0.0) {
            value += mu[j] * std::log(mu[j] / beta[j]);
        }
    }
    return value;
}

double lagrangian_sis(double x, double y, double beta, double gamma)
{
    if (!(x > 0.0 && x < 1.0)) {
        throw BoundaryX("closed-form SIS cost needs 0 < x < 1");
    }
    const double up   = beta * x * (1.0 - x);
    const double down = gamma * x;
    const double c    = 4.0 * up * down;
    const double s    = std::sqrt(y * y + c);
    // y + s loses all digits for large negative y; use the conjugate form there.
    const double numerator = y >= 0.0 ? y + s : c / (s - y);
    const double theta     = numerator / (2.0 * up);
    return y * std::log(theta) - up * (theta - 1.0) - down * (1.0 / theta - 1.0);
}

double lagrangian_sis_extended(double x, double y, double beta, double gamma)
{
    if (x > 0.0 && x < 1.0) {
        return lagrangian_sis(x, y, beta, gamma);
    }
    if (x == 0.0) {
        return y == 0.0 ? 0.0 : infinite_cost;
    }
    if (x == 1.0) {
        if (y > 0.0) {
            return infinite_cost;
        }
        const double mu = -y;
        return gamma - mu + (mu > 0.0 ? mu * std::log(mu / gamma) : 0.0);
    }
    throw DomainError("SIS cost evaluated outside [0, 1]");
}

LocalLagrangian::LocalLagrangian(const CompartmentalModel& model, std::span<const double> x, double mu_min)
    : m_jumps(model.jump_count())
    , m_mu_min(mu_min)
    , m_rates(model.rates(x))
{
    const std::size_t d = model.dimension();
    double largest      = 0.0;
    for (std::size_t j = 0; j < m_jumps; ++j) {
        if (m_rates[j] > 0.0) {
            m_active.push_back(j);
            largest = std::max(largest, m_rates[j]);
        }
    }
    m_scale = 1.0 + largest;
    if (m_active.empty()) {
        m_basis.resize(static_cast<Eigen::Index>(d), 0);
        m_reduced.resize(0, 0);
        return;
    }

    Eigen::MatrixXd directions(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m_active.size()));
    for (std::size_t a = 0; a < m_active.size(); ++a) {
        for (std::size_t i = 0; i < d; ++i) {
            directions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = model.direction(i, m_active[a]);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(directions, Eigen::ComputeThinU);
    const auto& sv    = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > 1e-10 * sv[0]) {
        ++rank;
    }
    m_basis   = svd.matrixU().leftCols(rank);
    m_reduced = m_basis.transpose() * directions;

    // Every r-subset of active directions with a nonsingular block spans a simplicial cone;
    // their union is the cone generated by all active directions.
    const auto m = static_cast<std::size_t>(m_reduced.cols());
    const auto r = static_cast<std::size_t>(rank);
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(r), true);
    do {
        Eigen::MatrixXd block(rank, rank);
        Eigen::Index col = 0;
        for (std::size_t a = 0; a < m; ++a) {
            if (pick[a]) {
                block.col(col++) = m_reduced.col(static_cast<Eigen::Index>(a));
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(block);
        if (lu.isInvertible()) {
            m_cone_inverses.push_back(lu.inverse());
        }
    } while (std::prev_permutation(pick.begin(), pick.end()));
}

bool LocalLagrangian::reachable(const Eigen::VectorXd& y_reduced) const
{
    if (y_reduced.size() == 0) {
        return true;
    }
    const double tol = 1e-12 * (1.0 + y_reduced.lpNorm<Eigen::Infinity>());
    for (const auto& inverse : m_cone_inverses) {
        if ((inverse * y_reduced).minCoeff() >= -tol) {
            return true;
        }
    }
    return false;
}

double LocalLagrangian::solve(std::span<const double> y, std::vector<double>* mu_out) const
{
    const auto d = static_cast<Eigen::Index>(y.size());
    if (d != m_basis.rows()) {
        throw DomainError("velocity has the wrong dimension");
    }
    const Eigen::Map<const Eigen::VectorXd> target(y.data(), d);
    const double y_norm = target.lpNorm<Eigen::Infinity>();

    if (m_active.empty()) {
        if (y_norm > 0.0) {
            return infinite_cost;
        }
        if (mu_out) {
            mu_out->assign(m_jumps, 0.0);
        }
        return 0.0;
    }

    const Eigen::VectorXd yr = m_basis.transpose() * target;
    if ((target - m_basis * yr).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + y_norm)) {
        return infinite_cost;
    }
    if (!reachable(yr)) {
        return infinite_cost;
    }

    const auto r     = m_reduced.rows();
    const auto m     = m_reduced.cols();
    const auto beta  = [&](Eigen::Index a) {
        return m_rates[m_active[static_cast<std::size_t>(a)]];
    };
    auto objective = [&](const Eigen::VectorXd& mu) {
        double f = 0.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            f += beta(a) - mu[a] + mu[a] * std::log(mu[a] / beta(a));
        }
        return f;
    };

    Eigen::VectorXd mu(m), nu = Eigen::VectorXd::Zero(r), grad(m), r_dual(m), d_mu(m), trial(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        mu[a] = beta(a);
    }
    std::vector<double> normal(static_cast<std::size_t>(r * r));
    std::vector<double> rhs(static_cast<std::size_t>(r));
    const double primal_tol = 1e-13 * (m_scale + y_norm);
    double f                = objective(mu);

    for (int iteration = 0; iteration < 100; ++iteration) {
        for (Eigen::Index a = 0; a < m; ++a) {
            grad[a] = std::log(mu[a] / beta(a));
        }
        r_dual                   = grad + m_reduced.transpose() * nu;
        const Eigen::VectorXd rp = m_reduced * mu - yr;
        const bool feasible      = rp.lpNorm<Eigen::Infinity>() <= primal_tol;

        // Reduced KKT system: (H M H^T) dnu = r_pri - H M r_dual with M = diag(mu).
        for (Eigen::Index p = 0; p < r; ++p) {
            double acc = rp[p];
            for (Eigen::Index a = 0; a < m; ++a) {
                acc -= m_reduced(p, a) * mu[a] * r_dual[a];
            }
            rhs[static_cast<std::size_t>(p)] = acc;
            for (Eigen::Index q = 0; q < r; ++q) {
                double s = 0.0;
                for (Eigen::Index a = 0; a < m; ++a) {
                    s += m_reduced(p, a) * mu[a] * m_reduced(q, a);
                }
                normal[static_cast<std::size_t>(p * r + q)] = s;
            }
        }
        solve_in_place(normal, rhs, 1e-300);
        const Eigen::Map<const Eigen::VectorXd> d_nu(rhs.data(), r);
        d_mu = -(mu.array() * (r_dual + m_reduced.transpose() * d_nu).array()).matrix();

        double decrement = 0.0;
        double step      = 1.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            decrement += d_mu[a] * d_mu[a] / mu[a];
            // Coordinates already at the floor are clamped rather than limiting the step.
            if (d_mu[a] < 0.0 && mu[a] > 10.0 * m_mu_min) {
                step = std::min(step, 0.99 * mu[a] / -d_mu[a]);
            }
        }
        if (feasible && decrement < 1e-20) {
            break;
        }

        double f_new = 0.0;
        while (true) {
            trial = (mu + step * d_mu).cwiseMax(m_mu_min);
            f_new = objective(trial);
            if (!feasible || step < 1e-12 || f_new <= f + 1e-4 * step * grad.dot(d_mu)) {
                break;
            }
            step *= 0.5;
        }
        mu = trial;
        nu += step * d_nu;
        const double change = f - f_new;
        f                   = f_new;
        if (feasible && std::abs(change) <= 1e-15 * (1.0 + std::abs(f))) {
            break;
        }
    }

    if (mu_out) {
        mu_out->assign(m_jumps, 0.0);
        for (Eigen::Index a = 0; a < m; ++a) {
            (*mu_out)[m_active[static_cast<std::size_t>(a)]] = mu[a];
        }
    }
    return std::max(f, 0.0);
}

LagrangianResult LocalLagrangian::evaluate(std::span<const double> y) const
{
    LagrangianResult result;
    result.value = solve(y, &result.mu);
    if (result.value == infinite_cost) {
        result.mu.clear();
    }
    return result;
}

double LocalLagrangian::value(std::span<const double> y) const
{
    return solve(y, nullptr);
}

LagrangianResult lagrangian_general(const CompartmentalModel& model, std::span<const double> x,
                                    std::span<const double> y)
{
    if (!model.contains(x)) {
        throw DomainError("cost evaluated outside the model domain");
    }
    return LocalLagrangian(model, x).evaluate(y);
}

LagrangianEvaluator::LagrangianEvaluator(const CompartmentalModel& model, LagrangianMode mode)
    : m_model(&model)
    , m_mode(mode)
{
    if (mode == LagrangianMode::sis_closed_form) {
        if (model.name() != "sis") {
            throw ConfigError("closed-form cost is only available for the SIS model");
        }
        m_beta  = model.parameter("beta");
        m_gamma = model.parameter("gamma");
    }
}

LagrangianEvaluator::LagrangianEvaluator(const CompartmentalModel& model)
    : LagrangianEvaluator(model, model.name() == "sis" ? LagrangianMode::sis_closed_form : LagrangianMode::general_mu)
{
}

double LagrangianEvaluator::operator()(std::span<const double> x, std::span<const double> y) const
{
    if (m_mode == LagrangianMode::sis_closed_form) {
        return lagrangian_sis_extended(x[0], y[0], m_beta, m_gamma);
    }
    return lagrangian_general(*m_model, x, y).value;
}

} // namespace epildp
