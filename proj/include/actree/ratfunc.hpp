#pragma once

#include "actree/poly.hpp"

namespace actree {

/// Reduced quotient num/den of polynomials; den is monic and coprime to num.
class RationalFunction {
 public:
  RationalFunction() : num_(), den_(Poly::constant(1)) {}
  RationalFunction(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }
  explicit RationalFunction(Poly num) : num_(std::move(num)), den_(Poly::constant(1)) {}

  static RationalFunction constant(const Rational& v) { return RationalFunction(Poly::constant(v)); }

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.degree() == 0; }

  RationalFunction operator-() const {
    RationalFunction r = *this;
    r.num_ = -r.num_;
    return r;
  }
  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.den_ == b.den_) return RationalFunction(a.num_ + b.num_, a.den_);
    Poly g = gcd(a.den_, b.den_);
    Poly ad = a.den_ / g, bd = b.den_ / g;
    return RationalFunction(a.num_ * bd + b.num_ * ad, a.den_ * bd);
  }
  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
    return a + (-b);
  }
  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
    if (a.is_zero() || b.is_zero()) return RationalFunction();
    // Cross-cancel first so the products stay small.
    Poly g1 = gcd(a.num_, b.den_), g2 = gcd(b.num_, a.den_);
    RationalFunction r;
    r.num_ = (a.num_ / g1) * (b.num_ / g2);
    r.den_ = (a.den_ / g2) * (b.den_ / g1);
    r.fix_lead();
    return r;
  }
  friend RationalFunction operator*(const Rational& s, const RationalFunction& f) {
    RationalFunction r = f;
    r.num_ = r.num_.scaled(s);
    if (r.num_.is_zero()) r.den_ = Poly::constant(1);
    return r;
  }
  RationalFunction inverse() const {
    if (is_zero()) fail("DivisionByZeroFunction", "inverse of the zero rational function");
    return RationalFunction(den_, num_);
  }
  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
    return a * b.inverse();
  }
  friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const RationalFunction& a, const RationalFunction& b) { return !(a == b); }

  Rational operator()(const Rational& x) const {
    Rational d = den_(x);
    if (d == 0) fail("EvaluationAtPole", "rational function has a pole at " + to_string(x));
    return num_(x) / d;
  }
  template <class T, class Real = T>
  T eval(const T& x) const {
    return num_.eval<T, Real>(x) / den_.eval<T, Real>(x);
  }

  RationalFunction derivative() const {
    return RationalFunction(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
  }

  /// x^(-k) R(1/x).
  RationalFunction reciprocal_variable(int k) const {
    if (is_zero()) return RationalFunction();
    int e = den_.degree() - num_.degree() - k;
    Poly n = num_.reversed(), d = den_.reversed();
    if (e >= 0) n = n.times_x_pow(e); else d = d.times_x_pow(-e);
    return RationalFunction(n, d);
  }

  /// R(s x).
  RationalFunction rescaled(const Rational& s) const { return RationalFunction(num_.rescaled(s), den_.rescaled(s)); }

  std::string str(const char* var = "x") const {
    return "(" + num_.str(var) + ")/(" + den_.str(var) + ")";
  }

 private:
  void normalize() {
    if (den_.is_zero()) fail("DivisionByZeroFunction", "zero denominator");
    if (num_.is_zero()) {
      den_ = Poly::constant(1);
      return;
    }
    Poly g = gcd(num_, den_);
    if (g.degree() > 0) {
      num_ = num_ / g;
      den_ = den_ / g;
    }
    fix_lead();
  }
  void fix_lead() {
    if (num_.is_zero()) {
      den_ = Poly::constant(1);
      return;
    }
    Rational l = den_.lead();
    if (l != 1) {
      num_ = num_.scaled(1 / l);
      den_ = den_.scaled(1 / l);
    }
  }
  Poly num_, den_;
};

}  // namespace actree
