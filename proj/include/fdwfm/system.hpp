#pragma once

#include <functional>
#include <optional>

#include "fdwfm/coc.hpp"
#include "fdwfm/core.hpp"
#include "fdwfm/linalg.hpp"

namespace fdwfm {

using VectorFunction = std::function<Vector(const Vector&)>;
using JacobianFunction = std::function<Matrix(const Vector&)>;

struct SystemProblem {
    VectorFunction F;
    /// Analytic Jacobian; required by Newton and WFM.
    JacobianFunction J;
    Vector x0;
    /// Overrides config.jacobian_init for the quasi-Newton methods.
    std::optional<Matrix> initial_jacobian;

    std::size_t dimension() const noexcept { return x0.size(); }
};

enum class SystemMethod { Newton, WFM, Broyden, FDWFM };

std::string_view to_string(SystemMethod m);

/// Forward differences with h_j = sqrt(eps) max(1, |x_j|); n+1 calls to F.
Matrix fd_jacobian(CountedFunction<Vector>& F, const Vector& x);

SolverReport<Vector> solve_broyden(const SystemProblem& problem, const SolverConfig& config = {});

/// Predictor X* = X_k - A_k^-1 F(X_k); B_k = broyden_update(A_k, X* - X_k, F(X*) - F(X_k));
/// corrector X_{k+1} = X_k - B_k^-1 F(X_k); then A_{k+1} = broyden_update(A_k, I_k, F(X_{k+1}) - F(X_k)).
SolverReport<Vector> solve_fdwfm_system(const SystemProblem& problem, const SolverConfig& config = {});

SolverReport<Vector> solve_newton_system(const SystemProblem& problem, const SolverConfig& config = {});

/// x_{n+1} = x_n - 2 (J(x_n) + J(x*))^-1 F(x_n) with the Newton predictor x*.
SolverReport<Vector> solve_wfm_system(const SystemProblem& problem, const SolverConfig& config = {});

SolverReport<Vector> solve_system(const SystemProblem& problem, SystemMethod method, const SolverConfig& config = {});

}  // namespace fdwfm
