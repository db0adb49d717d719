#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <type_traits>

#include "fdwfm/core.hpp"

namespace fdwfm {

/// Error norms at or below kCocNoiseUlps * eps * |x*| are treated as noise.
inline constexpr double kCocNoiseUlps = 10.0;

class TraceTooShort : public Error {
 public:
    using Error::Error;
};

template <class Point>
struct CocEstimate {
    /// Empty means NotDefined.
    std::optional<double> rho;
    std::array<std::size_t, 3> iterates_used{};
    Point root_proxy{};

    bool defined() const noexcept { return rho.has_value(); }
};

/// rho = ln(e2/e1) / ln(e1/e0) over the three iterates preceding the final one.
///
/// The window must consist of generated iterates only (starting points are
/// excluded); x* defaults to the final iterate.
template <class Point>
CocEstimate<Point> estimate_coc(const IterationTrace<Point>& trace,
                                std::optional<std::type_identity_t<Point>> root_proxy = std::nullopt) {
    const std::size_t n = trace.size();
    if (n < 4) throw TraceTooShort("COC needs at least 4 iterates");

    CocEstimate<Point> out;
    out.iterates_used = {n - 4, n - 3, n - 2};
    out.root_proxy = root_proxy ? *root_proxy : trace.iterates.back();
    if (n - 4 < trace.initial_count) return out;

    const double floor = kCocNoiseUlps * std::numeric_limits<double>::epsilon() * magnitude(out.root_proxy);
    std::array<double, 3> e{};
    for (std::size_t k = 0; k < 3; ++k) {
        e[k] = distance(trace.iterates[out.iterates_used[k]], out.root_proxy);
        if (!std::isfinite(e[k]) || e[k] <= floor || e[k] <= 0.0) return out;
    }
    if (!(e[1] < e[0] && e[2] < e[1])) return out;

    const double num = std::log(e[2] / e[1]);
    const double den = std::log(e[1] / e[0]);
    if (!std::isfinite(num) || !std::isfinite(den) || den == 0.0) return out;
    const double rho = num / den;
    if (std::isfinite(rho) && rho > 0.0) out.rho = rho;
    return out;
}

/// estimate_coc, with a short trace reported as NotDefined.
template <class Point>
std::optional<double> coc_or_undefined(const IterationTrace<Point>& trace) {
    if (trace.size() < 4) return std::nullopt;
    return estimate_coc(trace).rho;
}

}  // namespace fdwfm
