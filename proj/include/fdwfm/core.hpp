#pragma once

#include <array>
#include <complex>
#include <cstring>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdwfm {

using Complex = std::complex<double>;
using Vector = std::vector<double>;

enum class Status {
    Converged,
    MaxIterExceeded,
    DegenerateDenominator,
    SingularMatrix,
    NonFiniteValue,
};

enum class StopDecision { Continue, Converged, MaxIterExceeded };

enum class JacobianInit { FiniteDifference, Identity };

enum class SingularPolicy { Fail, ReinitJacobian };

std::string_view to_string(Status s);
std::string_view to_string(JacobianInit j);
std::string_view to_string(SingularPolicy p);

/// Tolerances, iteration cap and policy flags shared by every solver.
struct SolverConfig {
    double residual_tol = 1e-10;
    double step_tol = 1e-12;
    int max_iter = 100;
    /// Relative threshold for denominators formed as a difference or sum.
    double denom_guard = 1e-14;
    JacobianInit jacobian_init = JacobianInit::FiniteDifference;
    SingularPolicy on_singular = SingularPolicy::Fail;
    /// Disable the two-entry memo so every formal request is counted.
    bool count_formal = false;
    /// On a degenerate corrector denominator, accept the predictor instead of stopping.
    bool fallback_to_secant = false;
    /// Systems FDWFM: take step 1 as A_k I_k = F(X*) - F(X_k).
    bool literal_step1 = false;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

// Errors. Step primitives throw these; drivers translate them into Status.

class Error : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

enum class Stage { Predictor, Corrector, Derivative, Update };

std::string_view to_string(Stage s);

class DegenerateDenominator : public Error {
 public:
    explicit DegenerateDenominator(Stage stage);
    Stage stage() const noexcept { return stage_; }

 private:
    Stage stage_;
};

class SingularMatrix : public Error {
 public:
    SingularMatrix(std::size_t column, double pivot);
    std::size_t column() const noexcept { return column_; }

 private:
    std::size_t column_;
};

class NonFiniteValue : public Error {
 public:
    using Error::Error;
};

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
inline bool is_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double residual_norm(double value);
double residual_norm(Complex value);
double residual_norm(std::span<const double> value);
inline double residual_norm(const Vector& value) { return residual_norm(std::span<const double>(value)); }

/// Unchecked magnitude and distance helpers used by traces and the COC estimator.
inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(Complex v) { return std::abs(v); }
double magnitude(std::span<const double> v);
inline double magnitude(const Vector& v) { return magnitude(std::span<const double>(v)); }
inline double distance(double a, double b) { return std::abs(a - b); }
inline double distance(Complex a, Complex b) { return std::abs(a - b); }
double distance(const Vector& a, const Vector& b);

StopDecision check_stop(double residual, double step, int iter, const SolverConfig& config);

namespace detail {
inline bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }
inline bool same_bits(Complex a, Complex b) {
    return same_bits(a.real(), b.real()) && same_bits(a.imag(), b.imag());
}
inline bool same_bits(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_bits(a[i], b[i])) return false;
    return true;
}
}  // namespace detail

/// Wraps a user function and counts forwarded calls.
///
/// With memoization on, the two most recent (argument, value) pairs are kept
/// and a bit-identical argument is answered from the cache without counting.
template <class Arg, class Ret = Arg>
class CountedFunction {
 public:
    using Fn = std::function<Ret(const Arg&)>;

    explicit CountedFunction(Fn inner, bool memoize = true)
        : inner_(std::move(inner)), memoize_(memoize) {
        if (!inner_) throw std::invalid_argument("CountedFunction: empty function");
    }

    Ret operator()(const Arg& x) {
        if (memoize_) {
            for (const auto& slot : memo_)
                if (slot && detail::same_bits(slot->first, x)) return slot->second;
        }
        Ret value = inner_(x);
        ++count_;
        if (memoize_) {
            memo_[next_] = std::make_pair(x, value);
            next_ = (next_ + 1) % memo_.size();
        }
        return value;
    }

    long eval_count() const noexcept { return count_; }
    bool memoizing() const noexcept { return memoize_; }

 private:
    Fn inner_;
    long count_ = 0;
    bool memoize_;
    std::array<std::optional<std::pair<Arg, Ret>>, 2> memo_{};
    std::size_t next_ = 0;
};

template <class Point>
struct IterationTrace {
    std::vector<Point> iterates;
    std::vector<double> residual_norms;
    std::vector<long> nfe_at_step;
    /// How many leading entries are user-supplied starting points.
    std::size_t initial_count = 0;

    void record(const Point& x, double residual, long nfe) {
        iterates.push_back(x);
        residual_norms.push_back(residual);
        nfe_at_step.push_back(nfe);
    }
    std::size_t size() const noexcept { return iterates.size(); }
};

template <class Point>
struct SolverReport {
    Status status = Status::MaxIterExceeded;
    Point root{};
    int iterations = 0;
    long nfe = 0;
    /// Calls to the derivative or Jacobian (Newton and WFM only).
    long derivative_evals = 0;
    /// Empty means NotDefined.
    std::optional<double> coc;
    IterationTrace<Point> trace;
    /// Human-readable reason for a non-converged status.
    std::string detail;

    bool converged() const noexcept { return status == Status::Converged; }
};

}  // namespace fdwfm
