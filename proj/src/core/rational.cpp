#include "worldmodel/rational.hpp"

#include "worldmodel/error.hpp"
#include "worldmodel/prob.hpp"

#include <cctype>
#include <string>

namespace wm {

Rational parse_rational(std::string_view text)
{
    using boost::multiprecision::cpp_int;
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        exponent = std::stol(std::string(s.substr(e + 1)));
        s = s.substr(0, e);
    }
    cpp_int digits = 0;
    bool any = false;
    bool after_point = false;
    for (char c : s) {
        if (c == '.' && !after_point) {
            after_point = true;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw Error("parse", "malformed decimal '" + std::string(text) + "'");
        digits = digits * 10 + (c - '0');
        any = true;
        if (after_point)
            --exponent;
    }
    if (!any)
        throw Error("parse", "malformed decimal '" + std::string(text) + "'");
    Rational r(digits);
    cpp_int scale = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
    r = exponent < 0 ? r / Rational(scale) : r * Rational(scale);
    return negative ? Rational(-r) : r;
}

Rational to_rational(double x)
{
    return parse_rational(format_number(x));
}

double to_double(const Rational& r)
{
    return r.convert_to<double>();
}

} // namespace wm
