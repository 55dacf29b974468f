#include "worldmodel/prob.hpp"

#include "worldmodel/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace wm {

ProbInterval::ProbInterval(double lo_, double hi_) : lo(lo_), hi(hi_)
{
    if (!(lo >= 0.0 && hi <= 1.0 + kTolerance && lo <= hi + kTolerance) || std::isnan(lo) || std::isnan(hi))
        throw Error("interval", "invalid probability interval [" + format_number(lo_) + "," + format_number(hi_) + "]");
    hi = std::min(hi, 1.0);
    if (lo > hi)
        lo = hi;
}

ProbInterval interval_product(const ProbInterval& a, const ProbInterval& b)
{
    return {a.lo * b.lo, a.hi * b.hi};
}

ProbInterval hull(const ProbInterval& a, const ProbInterval& b)
{
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

bool approx_equal(const ProbInterval& a, const ProbInterval& b, double tol)
{
    return std::abs(a.lo - b.lo) <= tol && std::abs(a.hi - b.hi) <= tol;
}

std::string format_number(double x)
{
    if (x == 0.0)
        x = 0.0; // drop negative zero
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string format_interval(const ProbInterval& p)
{
    if (p.lo == p.hi)
        return format_number(p.lo);
    return format_interval_bracketed(p);
}

std::string format_interval_bracketed(const ProbInterval& p)
{
    return "[" + format_number(p.lo) + "," + format_number(p.hi) + "]";
}

double parse_number(std::string_view text)
{
    double value = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
        throw Error("parse", "malformed number '" + std::string(text) + "'");
    return value;
}

ProbInterval parse_interval(std::string_view text)
{
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']')
            throw Error("parse", "malformed interval '" + std::string(text) + "'");
        auto inner = text.substr(1, text.size() - 2);
        auto comma = inner.find(',');
        if (comma == std::string_view::npos)
            throw Error("parse", "malformed interval '" + std::string(text) + "'");
        double lo = parse_number(inner.substr(0, comma));
        double hi = parse_number(inner.substr(comma + 1));
        if (lo > hi)
            throw Error("parse", "interval with lo > hi '" + std::string(text) + "'");
        if (lo < 0.0 || hi > 1.0)
            throw Error("parse", "interval outside [0,1] '" + std::string(text) + "'");
        return {lo, hi};
    }
    double p = parse_number(text);
    if (p < 0.0 || p > 1.0)
        throw Error("parse", "probability outside [0,1] '" + std::string(text) + "'");
    return ProbInterval::point(p);
}

} // namespace wm
