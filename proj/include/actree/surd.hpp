#pragma once

#include <complex>
#include <cmath>
#include <vector>

#include "actree/ratfunc.hpp"

namespace actree {

enum class Variable { Z, Lambda };
/// Boundary value taken on a branch cut: from above (+i0), below (-i0), or Auto (= above).
enum class Side { Auto, Above, Below };

/// a^2 = 4(q-1).
inline Rational a_squared(int q) { return Rational(4 * (q - 1)); }
template <class Real = double>
Real a_value(int q) {
  using std::sqrt;
  return 2 * sqrt(Real(q - 1));
}

/// Radicand of s(z): q^2 - a^2 z^2.
inline Poly z_radicand(int q) { return Poly{Rational(q * q), Rational(0), -a_squared(q)}; }
/// Radicand of r(lambda): q^2 lambda^2 - a^2.
inline Poly lambda_radicand(int q) { return Poly{-a_squared(q), Rational(0), Rational(q * q)}; }

/// r(lambda) = q sqrt(lambda - a/q) sqrt(lambda + a/q): ~ q lambda at infinity, cut on [-a/q, a/q].
template <class Real>
std::complex<Real> r_lambda(int q, const std::complex<Real>& lam, Side side) {
  using std::sqrt;
  const Real c = a_value<Real>(q) / q;
  const Real qq(q);
  if (lam.imag() == 0) {
    Real x = lam.real();
    if (x > c) return {qq * sqrt(x * x - c * c), Real(0)};
    if (x < -c) return {-qq * sqrt(x * x - c * c), Real(0)};
    Real v = qq * sqrt(c * c - x * x);
    return side == Side::Below ? std::complex<Real>(Real(0), -v) : std::complex<Real>(Real(0), v);
  }
  return qq * sqrt(lam - c) * sqrt(lam + c);
}

/// s(z) = sqrt(q^2 - a^2 z^2) with s(0) = q; cut on |z| >= q/a along the real axis.
template <class Real>
std::complex<Real> s_z(int q, const std::complex<Real>& z, Side side) {
  if (z == std::complex<Real>(Real(0))) return {Real(q), Real(0)};
  // z + i0 corresponds to lambda = 1/z - i0.
  Side flipped = side == Side::Below ? Side::Above : Side::Below;
  return z * r_lambda<Real>(q, std::complex<Real>(Real(1)) / z, flipped);
}

/// lambda-variable form of f: lambda^-1 f(1/lambda) = B(lambda) + Bt(lambda) r(lambda).
struct LambdaForm {
  RationalFunction B, Bt;
};

/// U + V*root over W with polynomial U, V, W: a common-denominator form of R1 + R2*root.
struct CombinedForm {
  Poly U, V, W;

  static CombinedForm from(const RationalFunction& r1, const RationalFunction& r2) {
    Poly g = gcd(r1.den(), r2.den());
    Poly W = r1.den() * (r2.den() / g);
    return {r1.num() * (W / r1.den()), r2.num() * (W / r2.den()), W};
  }
};

/// f(z) = A(z) + At(z) s(z) with A, At rational over Q; the representation is unique.
class SurdFunction {
 public:
  explicit SurdFunction(int q = 3) : q_(q) {}
  SurdFunction(RationalFunction rat, RationalFunction surd, int q)
      : rat_(std::move(rat)), surd_(std::move(surd)), q_(q) {}

  static SurdFunction rational(int q, RationalFunction r) { return SurdFunction(std::move(r), RationalFunction(), q); }
  static SurdFunction constant(int q, const Rational& c) { return rational(q, RationalFunction::constant(c)); }
  /// The function s(z) itself.
  static SurdFunction s(int q) { return SurdFunction(RationalFunction(), RationalFunction::constant(1), q); }

  int q() const { return q_; }
  const RationalFunction& rat() const { return rat_; }
  const RationalFunction& surd() const { return surd_; }
  bool is_zero() const { return rat_.is_zero() && surd_.is_zero(); }

  SurdFunction operator-() const { return SurdFunction(-rat_, -surd_, q_); }
  friend SurdFunction operator+(const SurdFunction& a, const SurdFunction& b) {
    check_q(a, b);
    return SurdFunction(a.rat_ + b.rat_, a.surd_ + b.surd_, a.q_);
  }
  friend SurdFunction operator-(const SurdFunction& a, const SurdFunction& b) {
    check_q(a, b);
    return SurdFunction(a.rat_ - b.rat_, a.surd_ - b.surd_, a.q_);
  }
  friend SurdFunction operator*(const SurdFunction& a, const SurdFunction& b) {
    check_q(a, b);
    RationalFunction S(z_radicand(a.q_));
    RationalFunction rat = a.rat_ * b.rat_;
    if (!a.surd_.is_zero() && !b.surd_.is_zero()) rat = rat + a.surd_ * b.surd_ * S;
    return SurdFunction(rat, a.rat_ * b.surd_ + a.surd_ * b.rat_, a.q_);
  }
  friend SurdFunction operator*(const Rational& c, const SurdFunction& f) {
    return SurdFunction(c * f.rat_, c * f.surd_, f.q_);
  }
  friend SurdFunction operator*(const RationalFunction& c, const SurdFunction& f) {
    return SurdFunction(c * f.rat_, c * f.surd_, f.q_);
  }
  SurdFunction inverse() const {
    if (is_zero()) fail("DivisionByZeroFunction", "inverse of the zero surd function");
    if (surd_.is_zero()) return rational(q_, rat_.inverse());
    // 1/(A + At s) = (A - At s) / (A^2 - At^2 S); the norm vanishes only for f = 0.
    RationalFunction norm = rat_ * rat_ - surd_ * surd_ * RationalFunction(z_radicand(q_));
    RationalFunction inv = norm.inverse();
    return SurdFunction(rat_ * inv, -(surd_ * inv), q_);
  }
  friend SurdFunction operator/(const SurdFunction& a, const SurdFunction& b) {
    check_q(a, b);
    return a * b.inverse();
  }
  friend bool operator==(const SurdFunction& a, const SurdFunction& b) {
    return a.q_ == b.q_ && a.rat_ == b.rat_ && a.surd_ == b.surd_;
  }
  friend bool operator!=(const SurdFunction& a, const SurdFunction& b) { return !(a == b); }

  SurdFunction pow(int n) const {
    SurdFunction r = constant(q_, 1), b = *this;
    if (n < 0) {
      b = b.inverse();
      n = -n;
    }
    while (n > 0) {
      if (n & 1) r = r * b;
      n >>= 1;
      if (n) b = b * b;
    }
    return r;
  }

  /// d/dz, using s' = -a^2 z s / S.
  SurdFunction derivative() const {
    RationalFunction ds = RationalFunction(Poly{Rational(0), -a_squared(q_)}, z_radicand(q_));
    return SurdFunction(rat_.derivative(), surd_.derivative() + surd_ * ds, q_);
  }

  /// Taylor coefficients p_0..p_order about z = 0. Fails with PoleAtOrigin when
  /// negative powers survive.
  std::vector<Rational> series(int order) const;

  LambdaForm lambda_form() const { return {rat_.reciprocal_variable(1), surd_.reciprocal_variable(2)}; }

  /// Value at a complex point. For Variable::Lambda this is lambda^-1 f(1/lambda).
  std::complex<double> evaluate(std::complex<double> x, Variable var, Side side = Side::Auto) const;

  std::string str() const { return "[" + rat_.str("z") + "] + [" + surd_.str("z") + "]*s(z)"; }

 private:
  static void check_q(const SurdFunction& a, const SurdFunction& b) {
    if (a.q_ != b.q_)
      fail("MismatchedDegreeQ", "combining functions with q=" + std::to_string(a.q_) + " and q=" +
                                    std::to_string(b.q_));
  }
  RationalFunction rat_, surd_;
  int q_;
};

namespace detail {

/// Laurent coefficients of num/den for exponents [lo, hi] (entries below the true
/// valuation are zero).
inline std::vector<Rational> laurent(const RationalFunction& f, int lo, int hi) {
  std::vector<Rational> out(static_cast<size_t>(std::max(0, hi - lo + 1)));
  if (f.is_zero() || hi < lo) return out;
  int vn = f.num().valuation(), vd = f.den().valuation();
  Poly n = f.num().div_x_pow(vn), d = f.den().div_x_pow(vd);
  int e = vn - vd;
  int count = hi - e + 1;
  if (count <= 0) return out;
  std::vector<Rational> c(count);
  const Rational inv_d0 = 1 / d.coeff(0);
  for (int k = 0; k < count; ++k) {
    Rational acc = n.coeff(k);
    int upto = std::min(k, d.degree());
    for (int j = 1; j <= upto; ++j) acc -= d.coeff(j) * c[k - j];
    c[k] = acc * inv_d0;
  }
  for (int k = 0; k < count; ++k) {
    int ex = e + k;
    if (ex >= lo && ex <= hi) out[ex - lo] = c[k];
  }
  return out;
}

inline int laurent_start(const RationalFunction& f) {
  if (f.is_zero()) return 0;
  return f.num().valuation() - f.den().valuation();
}

/// Taylor coefficients of s(z) up to z^order.
inline std::vector<Rational> s_series(int q, int order) {
  std::vector<Rational> s(static_cast<size_t>(order) + 1);
  Rational binom(1);  // binom(1/2, k)
  Rational x = -a_squared(q) / Rational(q * q);
  Rational xp(1);
  for (int k = 0; 2 * k <= order; ++k) {
    if (k > 0) {
      binom *= (Rational(1, 2) - (k - 1)) / k;
      xp *= x;
    }
    s[2 * k] = Rational(q) * binom * xp;
  }
  return s;
}

}  // namespace detail

inline std::vector<Rational> SurdFunction::series(int order) const {
  int lo = std::min({0, detail::laurent_start(rat_), detail::laurent_start(surd_)});
  auto a = detail::laurent(rat_, lo, order);
  auto at = detail::laurent(surd_, lo, order);
  auto sc = detail::s_series(q_, order - lo);
  const int n = order - lo + 1;
  std::vector<Rational> total(a);
  for (int i = 0; i < n; ++i) {
    if (at[i] == 0) continue;
    for (int j = 0; i + j < n; ++j) {
      if (sc[j] != 0) total[i + j] += at[i] * sc[j];
    }
  }
  for (int i = 0; i < -lo; ++i) {
    if (total[i] != 0) fail("PoleAtOrigin", "negative power z^" + std::to_string(i + lo) + " survives");
  }
  return std::vector<Rational>(total.begin() - lo, total.end());
}

namespace detail {

inline std::complex<double> eval_poly(const Poly& p, std::complex<double> x) {
  return p.eval<std::complex<double>, double>(x);
}

/// (U + V root)/W at x, resolving a removable 0/0 by one step of l'Hopital.
inline std::complex<double> eval_combined(const CombinedForm& f, const Poly& radicand, std::complex<double> x,
                                          std::complex<double> root) {
  auto W = eval_poly(f.W, x);
  auto N = eval_poly(f.U, x) + eval_poly(f.V, x) * root;
  double scale = 0;
  for (const auto& c : f.W.coeffs()) scale += std::abs(c.convert_to<double>()) * std::pow(std::max(1.0, std::abs(x)), f.W.degree());
  if (std::abs(W) > 1e-13 * scale) return N / W;
  double nscale = 0;
  for (const auto& c : f.U.coeffs()) nscale += std::abs(c.convert_to<double>());
  for (const auto& c : f.V.coeffs()) nscale += std::abs(c.convert_to<double>()) * std::max(1.0, std::abs(root));
  if (std::abs(N) > 1e-9 * std::max(1.0, nscale)) fail("EvaluationAtPole", "pole at the requested point");
  if (root == std::complex<double>(0)) fail("EvaluationAtPole", "removable point at a branch point");
  auto droot = eval_poly(radicand.derivative(), x) / (2.0 * root);
  auto dN = eval_poly(f.U.derivative(), x) + eval_poly(f.V.derivative(), x) * root + eval_poly(f.V, x) * droot;
  auto dW = eval_poly(f.W.derivative(), x);
  if (std::abs(dW) == 0) fail("EvaluationAtPole", "higher-order singularity at the requested point");
  return dN / dW;
}

}  // namespace detail

namespace detail {

/// r1 + r2 * root part by part; the combined form is only needed near a zero of a denominator.
inline std::complex<double> eval_parts(const RationalFunction& r1, const RationalFunction& r2, const Poly& radicand,
                                       std::complex<double> x, std::complex<double> root) {
  auto near_zero = [&](const Poly& d) {
    double scale = 0, ax = std::max(1.0, std::abs(x));
    for (const auto& c : d.coeffs()) scale += std::abs(c.convert_to<double>());
    return std::abs(eval_poly(d, x)) <= 1e-9 * scale * std::pow(ax, d.degree());
  };
  if (near_zero(r1.den()) || (!r2.is_zero() && near_zero(r2.den())))
    return eval_combined(CombinedForm::from(r1, r2), radicand, x, root);
  std::complex<double> v = eval_poly(r1.num(), x) / eval_poly(r1.den(), x);
  if (!r2.is_zero()) v += eval_poly(r2.num(), x) / eval_poly(r2.den(), x) * root;
  return v;
}

}  // namespace detail

inline std::complex<double> SurdFunction::evaluate(std::complex<double> x, Variable var, Side side) const {
  if (var == Variable::Z) {
    if (x == std::complex<double>(0)) return {series(0)[0].convert_to<double>(), 0.0};
    return detail::eval_parts(rat_, surd_, z_radicand(q_), x, s_z<double>(q_, x, side));
  }
  if (x == std::complex<double>(0)) fail("EvaluationAtPole", "lambda = 0 corresponds to z = infinity");
  LambdaForm lf = lambda_form();
  return detail::eval_parts(lf.B, lf.Bt, lambda_radicand(q_), x, r_lambda<double>(q_, x, side));
}

}  // namespace actree
