#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string_view>

namespace wm {

using Rational = boost::multiprecision::cpp_rational;

/// The decimal a probability stands for in model files: the value printed
/// with 12 significant digits, read back exactly. 0.1 becomes 1/10.
Rational to_rational(double x);

/// Exact value of a decimal literal such as "0.125" or "1e-05".
Rational parse_rational(std::string_view decimal);

double to_double(const Rational& r);

} // namespace wm
