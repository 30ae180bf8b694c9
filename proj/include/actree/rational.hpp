#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include "actree/errors.hpp"

namespace actree {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

// Working precisions for the numeric stages: residues are taken at 100 digits,
// oscillatory integrals that must resolve exponentially small values at 50.
using Float100 = boost::multiprecision::cpp_bin_float_100;
using Float50 = boost::multiprecision::cpp_bin_float_50;

template <class Real>
Real to_real(const Rational& r) {
  if constexpr (std::is_same_v<Real, double>) {
    return r.convert_to<double>();
  } else if constexpr (std::is_same_v<Real, long double>) {
    return r.convert_to<long double>();
  } else {
    return Real(BigInt(boost::multiprecision::numerator(r))) /
           Real(BigInt(boost::multiprecision::denominator(r)));
  }
}

/// "p/q", or just "p" for integers.
inline std::string to_string(const Rational& r) { return r.str(); }

inline Rational parse_rational(const std::string& text) {
  try {
    auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(BigInt(text));
    BigInt num(text.substr(0, slash));
    BigInt den(text.substr(slash + 1));
    if (den == 0) fail("MalformedRational", "zero denominator in '" + text + "'");
    return Rational(num, den);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail("MalformedRational", "cannot parse '" + text + "'");
  }
}

inline int sign(const Rational& r) { return r.sign(); }

inline Rational abs(const Rational& r) { return r.sign() < 0 ? Rational(-r) : r; }

/// Smallest-denominator rational within `tol` of `x`, searching denominators up to `max_den`.
inline bool best_rational(double x, double tol, long max_den, Rational& out) {
  // Continued-fraction convergents.
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(v);
    long long a = static_cast<long long>(fl);
    long long h2 = a * h1 + h0;
    long long k2 = a * k1 + k0;
    if (k2 > max_den) return false;
    if (std::abs(static_cast<double>(h2) / static_cast<double>(k2) - x) <= tol) {
      out = Rational(BigInt(h2), BigInt(k2));
      return true;
    }
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    double frac = v - fl;
    if (frac == 0.0) return false;
    v = 1.0 / frac;
  }
  return false;
}

}  // namespace actree
