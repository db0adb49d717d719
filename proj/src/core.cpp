#include "fdwfm/core.hpp"

#include <cmath>
#include <string>

namespace fdwfm {

std::string_view to_string(Status s) {
    switch (s) {
        case Status::Converged: return "Converged";
        case Status::MaxIterExceeded: return "MaxIterExceeded";
        case Status::DegenerateDenominator: return "DegenerateDenominator";
        case Status::SingularMatrix: return "SingularMatrix";
        case Status::NonFiniteValue: return "NonFiniteValue";
    }
    return "?";
}

std::string_view to_string(JacobianInit j) {
    return j == JacobianInit::FiniteDifference ? "fd" : "identity";
}

std::string_view to_string(SingularPolicy p) {
    return p == SingularPolicy::Fail ? "fail" : "reinit";
}

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::Predictor: return "predictor";
        case Stage::Corrector: return "corrector";
        case Stage::Derivative: return "derivative";
        case Stage::Update: return "update";
    }
    return "?";
}

void SolverConfig::validate() const {
    if (!(residual_tol > 0.0)) throw std::invalid_argument("residual_tol must be > 0");
    if (!(step_tol >= 0.0)) throw std::invalid_argument("step_tol must be >= 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(denom_guard >= 0.0)) throw std::invalid_argument("denom_guard must be >= 0");
}

DegenerateDenominator::DegenerateDenominator(Stage stage)
    : Error("degenerate denominator in " + std::string(to_string(stage)) + " stage"), stage_(stage) {}

SingularMatrix::SingularMatrix(std::size_t column, double pivot)
    : Error("singular matrix: pivot " + std::to_string(pivot) + " in column " + std::to_string(column)),
      column_(column) {}

double residual_norm(double value) {
    if (!std::isfinite(value)) throw NonFiniteValue("non-finite residual");
    return std::abs(value);
}

double residual_norm(Complex value) {
    if (!is_finite(value)) throw NonFiniteValue("non-finite residual");
    return std::abs(value);
}

double residual_norm(std::span<const double> value) {
    if (!is_finite(value)) throw NonFiniteValue("non-finite residual");
    return magnitude(value);
}

double magnitude(std::span<const double> v) {
    // scaled sum of squares, safe against overflow of intermediate squares
    double scale = 0.0, ssq = 1.0;
    for (double x : v) {
        if (x == 0.0) continue;
        double a = std::abs(x);
        if (scale < a) {
            ssq = 1.0 + ssq * (scale / a) * (scale / a);
            scale = a;
        } else {
            ssq += (a / scale) * (a / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

double distance(const Vector& a, const Vector& b) {
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return magnitude(d);
}

StopDecision check_stop(double residual, double step, int iter, const SolverConfig& config) {
    if (residual <= config.residual_tol || step <= config.step_tol) return StopDecision::Converged;
    if (iter >= config.max_iter) return StopDecision::MaxIterExceeded;
    return StopDecision::Continue;
}

}  // namespace fdwfm
