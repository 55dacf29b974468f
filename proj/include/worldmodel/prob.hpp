#pragma once

#include <string>
#include <string_view>

namespace wm {

// Comparison tolerance used for every probability check in the toolkit.
inline constexpr double kTolerance = 1e-9;

/// Closed subinterval [lo, hi] of [0, 1]. A known probability p is [p, p];
/// an unknown one is [0, 1].
struct ProbInterval
{
    double lo = 0.0;
    double hi = 0.0;

    constexpr ProbInterval() = default;
    ProbInterval(double lo_, double hi_);

    static ProbInterval point(double p) { return {p, p}; }
    static ProbInterval unknown() { return {0.0, 1.0}; }
    static ProbInterval zero() { return {0.0, 0.0}; }
    static ProbInterval one() { return {1.0, 1.0}; }

    [[nodiscard]] bool is_point() const { return hi - lo <= kTolerance; }
    [[nodiscard]] bool is_zero() const { return hi <= kTolerance; }
    [[nodiscard]] double midpoint() const { return 0.5 * (lo + hi); }
    [[nodiscard]] double width() const { return hi - lo; }
    [[nodiscard]] bool contains(double p) const { return p >= lo - kTolerance && p <= hi + kTolerance; }
    [[nodiscard]] bool contains(const ProbInterval& o) const { return contains(o.lo) && contains(o.hi); }

    friend bool operator==(const ProbInterval&, const ProbInterval&) = default;
};

/// Probability that both independent choices happen: [a.lo*b.lo, a.hi*b.hi].
ProbInterval interval_product(const ProbInterval& a, const ProbInterval& b);

/// Smallest interval containing both.
ProbInterval hull(const ProbInterval& a, const ProbInterval& b);

bool approx_equal(const ProbInterval& a, const ProbInterval& b, double tol = kTolerance);

/// Decimal rendering with up to 12 significant digits.
std::string format_number(double x);

/// `p` for point intervals, `[lo,hi]` otherwise.
std::string format_interval(const ProbInterval& p);

/// Always bracketed, used by event stream files.
std::string format_interval_bracketed(const ProbInterval& p);

/// Accepts `p` or `[lo,hi]`. Throws wm::Error("parse", ...) on malformed input
/// and on lo > hi.
ProbInterval parse_interval(std::string_view text);

double parse_number(std::string_view text);

} // namespace wm
