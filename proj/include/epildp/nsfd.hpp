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
#ifndef EPILDP_NSFD_HPP
#define EPILDP_NSFD_HPP

#include "epildp/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace epildp
{

enum class PhiChoice
{
    one_minus_exp, ///< phi(z) = 1 - exp(-z)
    rational,      ///< phi(z) = z / (1 + z^2)
};

/// psi(h) = phi(Q h) / Q, the step-size substitute of the nonstandard scheme.
struct DenominatorFunction {
    double q       = 1.0;
    PhiChoice phi  = PhiChoice::one_minus_exp;

    double operator()(double h) const;
};

double phi(PhiChoice choice, double z);

struct NSFDConfig {
    double h = 0.1;
    double horizon = 1.0;
    State initial;
    PhiChoice phi = PhiChoice::one_minus_exp;
    /// When empty, Q is computed from the model's equilibria.
    std::optional<double> q;
};

/// max over all equilibria and eigenvalues of |lambda|^2 / (2 |Re lambda|).
/// Throws NonHyperbolic if some |Re lambda| < 1e-9.
double compute_q(const CompartmentalModel& model, const std::vector<Equilibrium>& equilibria);
/// Same bound from a flat list of eigenvalues.
double compute_q(const std::vector<std::complex<double>>& eigenvalues);

/// One step of (I - psi A(z)) z' = z + psi f. Throws SingularSystem on a vanishing pivot.
State nsfd_step(const MetzlerForm& form, double psi_h, std::span<const double> z);

/// Nonstandard scheme on t_m = m h up to the horizon. Needs the model's Metzler form.
Trajectory nsfd_integrate(const CompartmentalModel& model, const NSFDConfig& config);

/// Forward Euler on the drift. No domain checks: instabilities are kept.
Trajectory explicit_integrate(const CompartmentalModel& model, double h, double horizon, std::span<const double> initial);

enum class RiccatiBranch
{
    corrected,  ///< x / (1 + beta x t) when beta == gamma
    as_printed, ///< x / (1 - beta x t) when beta == gamma
};

/// Closed-form solution of dZ/dt = beta Z (1 - Z) - gamma Z. Throws Blowup on a non-positive denominator.
double sis_exact(double x, double beta, double gamma, double t, RiccatiBranch branch = RiccatiBranch::corrected);

struct ClassifyConfig {
    double h = 0.1;
    double tolerance = 1e-4;
    double t_max = 2000.0;
    PhiChoice phi = PhiChoice::one_minus_exp;
    std::optional<double> q;
};

/// Result of following the NSFD flow until it settles at a stable equilibrium.
struct Attractor {
    /// Index into the equilibrium list; empty when undecided at t_max.
    std::optional<std::size_t> index;
    double time = 0.0;
};

/// Helper bundle so repeated classifications do not recompute equilibria and Q.
class AttractorClassifier
{
public:
    AttractorClassifier(const CompartmentalModel& model, ClassifyConfig config = {});
    AttractorClassifier(const CompartmentalModel& model, std::vector<Equilibrium> equilibria, ClassifyConfig config);

    Attractor classify(std::span<const double> z0) const;

    const std::vector<Equilibrium>& equilibria() const
    {
        return m_equilibria;
    }
    double psi_h() const
    {
        return m_psi_h;
    }

private:
    const CompartmentalModel* m_model;
    std::vector<Equilibrium> m_equilibria;
    ClassifyConfig m_config;
    double m_psi_h;
};

Attractor classify_attractor(const CompartmentalModel& model, std::span<const double> z0, const ClassifyConfig& config = {});

struct BoundaryConfig {
    /// Coordinate scanned by bisection (for SIV: I = 2) and coordinate fixed per line (V = 1).
    std::size_t scan_coordinate = 2;
    std::size_t line_coordinate = 1;
    /// Values of the line coordinate; one bisection per value.
    std::vector<double> lines;
    int iterations = 30;
    unsigned threads = 1;
    ClassifyConfig classify;
};

struct BoundaryPoint {
    double scan;
    double line;
};

/// Separatrix between two basins of attraction. For one-dimensional models the
/// boundary points are the unstable equilibria; otherwise a bisection per line
/// between points attracted to different stable equilibria. Throws NotBistable
/// when fewer than two stable equilibria exist in dimension > 1.
std::vector<BoundaryPoint> characteristic_boundary(const CompartmentalModel& model, const BoundaryConfig& config);

} // namespace epildp

#endif // EPILDP_NSFD_HPP
