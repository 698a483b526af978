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
#ifndef EPILDP_LAGRANGIAN_HPP
#define EPILDP_LAGRANGIAN_HPP

#include "epildp/model.hpp"

#include <limits>
#include <span>
#include <vector>

namespace epildp
{

inline constexpr double infinite_cost = std::numeric_limits<double>::infinity();

/// l(p, x, y) = p.y - sum_j beta_j(x) (exp(p.h_j) - 1); the Lagrangian is its supremum over p.
double ell(const CompartmentalModel& model, std::span<const double> x, std::span<const double> p,
           std::span<const double> y);

/// Entropy form sum_j beta_j - mu_j + mu_j log(mu_j / beta_j), with 0 log 0 = 0.
/// Returns +inf if some mu_j > 0 where beta_j = 0.
double ell_tilde(std::span<const double> mu, std::span<const double> beta);

/// Closed form for the SIS model. Throws BoundaryX unless 0 < x < 1.
double lagrangian_sis(double x, double y, double beta, double gamma);

/// SIS cost including the boundary points x = 0 and x = 1, evaluated from the entropy form.
double lagrangian_sis_extended(double x, double y, double beta, double gamma);

struct LagrangianResult {
    double value = infinite_cost;
    /// Minimizing intensities, one per jump; empty when y cannot be reached from x.
    std::vector<double> mu;
};

/// Local data of the constrained minimization at a fixed state x: rates, active jumps,
/// and the reduced constraint system. Reused for many velocities y at the same x.
class LocalLagrangian
{
public:
    LocalLagrangian(const CompartmentalModel& model, std::span<const double> x, double mu_min = 1e-12);

    LagrangianResult evaluate(std::span<const double> y) const;
    /// Same as evaluate(y).value without allocating the minimizer.
    double value(std::span<const double> y) const;

    const std::vector<double>& rates() const
    {
        return m_rates;
    }

private:
    double solve(std::span<const double> y, std::vector<double>* mu_out) const;
    bool reachable(const Eigen::VectorXd& y_reduced) const;

    std::size_t m_jumps;
    double m_mu_min;
    std::vector<double> m_rates;
    std::vector<std::size_t> m_active;
    /// Orthonormal basis of the span of the active directions (d x r).
    Eigen::MatrixXd m_basis;
    /// Active directions in that basis (r x m).
    Eigen::MatrixXd m_reduced;
    /// Inverses of the invertible r x r column subsets, for the cone test.
    std::vector<Eigen::MatrixXd> m_cone_inverses;
    double m_scale;
};

/// Minimizes the entropy form over mu >= 0 subject to sum_j mu_j h_j = y.
LagrangianResult lagrangian_general(const CompartmentalModel& model, std::span<const double> x,
                                    std::span<const double> y);

enum class LagrangianMode
{
    sis_closed_form,
    general_mu,
};

/// Dispatches between the SIS closed form and the general minimization.
class LagrangianEvaluator
{
public:
    LagrangianEvaluator(const CompartmentalModel& model, LagrangianMode mode);
    /// Closed form for the SIS model, general minimization otherwise.
    explicit LagrangianEvaluator(const CompartmentalModel& model);

    double operator()(std::span<const double> x, std::span<const double> y) const;

    LagrangianMode mode() const
    {
        return m_mode;
    }
    const CompartmentalModel& model() const
    {
        return *m_model;
    }

private:
    const CompartmentalModel* m_model;
    LagrangianMode m_mode;
    double m_beta  = 0.0;
    double m_gamma = 0.0;
};

} // namespace epildp

#endif // EPILDP_LAGRANGIAN_HPP
