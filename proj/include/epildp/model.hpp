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
#ifndef EPILDP_MODEL_HPP
#define EPILDP_MODEL_HPP

#include "epildp/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epildp
{

using State = std::vector<double>;

/// c * z_0^e_0 * ... * z_{d-1}^e_{d-1}
struct Monomial {
    double coefficient = 0.0;
    std::vector<int> exponents;
};

/// Sum of monomials in the state coordinates. Used for every built-in rate so that
/// derivatives are exact.
class Polynomial
{
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Monomial> terms);

    double operator()(std::span<const double> z) const;
    /// Partial derivative with respect to z_i.
    double derivative(std::span<const double> z, std::size_t i) const;

    const std::vector<Monomial>& terms() const
    {
        return m_terms;
    }

private:
    std::vector<Monomial> m_terms;
};

using RateCallback = std::function<double(std::span<const double>)>;

/// A jump rate beta_j: either a polynomial (analytic derivatives) or an arbitrary callback
/// (central finite differences).
class RateFunction
{
public:
    RateFunction(Polynomial polynomial);
    RateFunction(RateCallback callback);

    double operator()(std::span<const double> z) const;
    double derivative(std::span<const double> z, std::size_t i) const;

    bool is_polynomial() const
    {
        return m_polynomial.has_value();
    }
    const Polynomial* polynomial() const
    {
        return m_polynomial ? &*m_polynomial : nullptr;
    }

private:
    std::optional<Polynomial> m_polynomial;
    RateCallback m_callback;
};

enum class SumConstraint
{
    none,
    at_most_one,
    equal_one,
};

/// Bounding box plus an optional constraint on the coordinate sum.
struct Domain {
    std::vector<double> lower;
    std::vector<double> upper;
    SumConstraint sum = SumConstraint::none;

    bool contains(std::span<const double> z, double tol = 1e-10) const;
};

struct Jump {
    std::vector<int> direction;
    RateFunction rate;
    std::string label;
};

/// dZ/dt = A(Z) Z + f with A Metzler. The matrix callback fills a row-major d x d buffer.
struct MetzlerForm {
    std::function<void(std::span<const double>, std::span<double>)> matrix;
    std::vector<double> f;

    Eigen::MatrixXd evaluate(std::span<const double> z) const;
};

struct ModelDefinition {
    std::string name;
    std::vector<std::string> compartments;
    std::vector<Jump> jumps;
    Domain domain;
    std::map<std::string, double> parameters;
    /// Coordinates that count infected individuals; an equilibrium is disease free when they vanish.
    std::vector<std::size_t> infected;
    /// For SumConstraint::equal_one: the coordinate eliminated by the constraint.
    std::optional<std::size_t> dependent;
    std::optional<MetzlerForm> metzler;
};

/// Poisson-driven jump model: directions h_j, rates beta_j, domain A. Immutable after construction.
class CompartmentalModel
{
public:
    explicit CompartmentalModel(ModelDefinition definition);

    const std::string& name() const
    {
        return m_def.name;
    }
    std::size_t dimension() const
    {
        return m_def.compartments.size();
    }
    std::size_t jump_count() const
    {
        return m_def.jumps.size();
    }
    const std::vector<std::string>& compartments() const
    {
        return m_def.compartments;
    }
    const std::vector<Jump>& jumps() const
    {
        return m_def.jumps;
    }
    const Domain& domain() const
    {
        return m_def.domain;
    }
    const std::map<std::string, double>& parameters() const
    {
        return m_def.parameters;
    }
    double parameter(const std::string& key) const;
    const std::vector<std::size_t>& infected() const
    {
        return m_def.infected;
    }
    std::optional<std::size_t> dependent() const
    {
        return m_def.dependent;
    }
    const std::optional<MetzlerForm>& metzler() const
    {
        return m_def.metzler;
    }
    bool all_rates_polynomial() const;

    /// Direction component h_{ij} (coordinate i, jump j).
    int direction(std::size_t i, std::size_t j) const
    {
        return m_def.jumps[j].direction[i];
    }
    /// d x k matrix whose columns are the jump directions.
    const Eigen::MatrixXd& direction_matrix() const
    {
        return m_directions;
    }

    bool contains(std::span<const double> z) const
    {
        return m_def.domain.contains(z);
    }

    /// beta_j(z) for every jump, no domain check.
    void rates(std::span<const double> z, std::span<double> out) const;
    std::vector<double> rates(std::span<const double> z) const;

private:
    ModelDefinition m_def;
    Eigen::MatrixXd m_directions;
};

/// The same model scaled to population N: nu_j = h_j / N, a_j = N beta_j.
class ScaledModel
{
public:
    ScaledModel(CompartmentalModel model, std::int64_t population);

    const CompartmentalModel& base() const
    {
        return m_model;
    }
    std::int64_t population() const
    {
        return m_population;
    }
    double nu(std::size_t i, std::size_t j) const
    {
        return static_cast<double>(m_model.direction(i, j)) / static_cast<double>(m_population);
    }
    /// a_j(z) for every jump; returns a_0(z).
    double propensities(std::span<const double> z, std::span<double> out) const;

private:
    CompartmentalModel m_model;
    std::int64_t m_population;
};

enum class Stability
{
    stable,
    unstable,
    non_hyperbolic,
};

enum class EquilibriumKind
{
    disease_free,
    endemic,
};

struct Equilibrium {
    State point;
    Stability stability = Stability::non_hyperbolic;
    EquilibriumKind kind = EquilibriumKind::endemic;
    std::vector<std::complex<double>> eigenvalues;
};

struct EquilibriumSearch {
    std::vector<Equilibrium> equilibria;
    /// Seeds for which Newton did not converge within the iteration budget.
    std::vector<State> failed_seeds;
};

enum class TrajectorySource
{
    nsfd,
    explicit_euler,
    exact,
    ssa,
    tau_leap,
    optimal_control,
};

std::string to_string(TrajectorySource source);
std::string to_string(Stability stability);
std::string to_string(EquilibriumKind kind);

/// Time-stamped state sequence, states stored row-major.
struct Trajectory {
    enum Flag : std::uint8_t
    {
        none         = 0,
        repaired     = 1,
        out_of_range = 2,
    };

    std::size_t dimension = 0;
    TrajectorySource source = TrajectorySource::nsfd;
    std::vector<double> times;
    std::vector<double> states;
    std::vector<std::uint8_t> flags;

    Trajectory() = default;
    Trajectory(std::size_t dim, TrajectorySource src)
        : dimension(dim)
        , source(src)
    {
    }

    std::size_t size() const
    {
        return times.size();
    }
    void push_back(double t, std::span<const double> z, std::uint8_t flag = none);
    std::span<const double> state(std::size_t index) const
    {
        return {states.data() + index * dimension, dimension};
    }
    std::span<const double> back() const
    {
        return state(size() - 1);
    }
    /// Right-continuous step interpolation: the last recorded state at or before t.
    std::span<const double> at(double t) const;
};

/// Splits the drift of polynomial jumps into A(z) z + f. A loss of coordinate i lands on the
/// diagonal, a gain in the column of a coordinate consumed by the same jump, so conservative
/// jumps give zero column sums. Returns nothing if some rate is not polynomial, a loss term does
/// not vanish with its coordinate, or a constant term is negative.
std::optional<MetzlerForm> derive_metzler_form(const std::vector<Jump>& jumps, std::size_t dimension);

/// b(z) = sum_j h_j beta_j(z). Throws DomainError outside A.
State drift(const CompartmentalModel& model, std::span<const double> z);
/// Same as drift() without the membership check; writes into out.
void drift_unchecked(const CompartmentalModel& model, std::span<const double> z, std::span<double> out);

/// k x d matrix of d beta_j / d z_i.
Eigen::MatrixXd rate_jacobian(const CompartmentalModel& model, std::span<const double> z);
/// k x d matrix of d a_j / d z_i = N d beta_j / d z_i.
Eigen::MatrixXd rate_jacobian(const ScaledModel& model, std::span<const double> z);
/// Central finite differences of the rates, step 1e-6 * max(1, |z_i|).
Eigen::MatrixXd rate_jacobian_fd(const CompartmentalModel& model, std::span<const double> z);

/// d x d Jacobian of the drift.
Eigen::MatrixXd drift_jacobian(const CompartmentalModel& model, std::span<const double> z);
/// Jacobian of the drift restricted to the affine hull of the domain: for a model with
/// a sum-equals-one constraint the dependent coordinate is eliminated.
Eigen::MatrixXd tangent_jacobian(const CompartmentalModel& model, std::span<const double> z);

/// Eigenvalue based classification; |Re lambda| < 1e-9 gives non_hyperbolic.
Stability classify_stability(const std::vector<std::complex<double>>& eigenvalues);

EquilibriumSearch find_equilibria(const CompartmentalModel& model, const std::vector<State>& seeds);
/// A seed lattice covering the domain, used when no seeds are given.
std::vector<State> default_seeds(const CompartmentalModel& model);

struct SisParameters {
    double beta  = 1.5;
    double gamma = 1.0;
};

/// Vaccination model parameters (state order S, V, I).
struct SivParameters {
    double beta  = 3.6;
    double gamma = 1.0;
    double eta   = 0.3;
    double theta = 0.02;
    double mu    = 0.03;
    double sigma = 0.1;
};

SisParameters sis_parameters(const CompartmentalModel& model);
SivParameters siv_parameters(const CompartmentalModel& model);

enum class SivJumpTable
{
    /// Vaccination moves S to V at rate eta S, waning moves V to S at rate theta V (matches the Metzler form).
    consistent,
    /// The reduced (I, V) jump table as printed: V grows at rate theta V and shrinks at rate eta S.
    as_printed,
};

/// One compartment (proportion infected), A = [0,1].
CompartmentalModel make_sis(const SisParameters& params = {});
/// Three compartments (S, V, I) on the unit simplex, seven jumps. Only the consistent table
/// carries a Metzler form; the printed one is named "siv_printed".
CompartmentalModel make_siv(const SivParameters& params = {}, SivJumpTable table = SivJumpTable::consistent);
/// Built-in by name ("sis", "siv", "siv_printed") with parameter overrides; unknown keys raise ConfigError.
CompartmentalModel make_builtin(const std::string& name, const std::map<std::string, double>& overrides = {});

struct ReproductionNumbers {
    double r0;
    double r0_without_vaccination;
};

ReproductionNumbers basic_reproduction_number(const SivParameters& params);

/// (S, V, I) -> (I, V) and back.
std::array<double, 2> siv_reduced_view(std::span<const double> z);
State siv_full_state(double infected, double vaccinated);

} // namespace epildp

#endif // EPILDP_MODEL_HPP
