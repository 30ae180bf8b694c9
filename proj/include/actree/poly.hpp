#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "actree/rational.hpp"

namespace actree {

/// Dense univariate polynomial with exact rational coefficients, lowest degree first.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Rational> coeffs) : c_(std::move(coeffs)) { trim(); }
  Poly(std::initializer_list<Rational> coeffs) : c_(coeffs) { trim(); }

  static Poly constant(const Rational& v) { return Poly(std::vector<Rational>{v}); }
  static Poly monomial(const Rational& v, int k) {
    std::vector<Rational> c(static_cast<size_t>(k) + 1);
    c[k] = v;
    return Poly(std::move(c));
  }
  static Poly x() { return monomial(Rational(1), 1); }

  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_constant() const { return c_.size() <= 1; }

  Rational coeff(int i) const {
    return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : Rational(0);
  }
  const std::vector<Rational>& coeffs() const { return c_; }
  const Rational& lead() const { return c_.back(); }

  /// Power of x dividing the polynomial (0 for the zero polynomial).
  int valuation() const {
    for (size_t i = 0; i < c_.size(); ++i)
      if (c_[i] != 0) return static_cast<int>(i);
    return 0;
  }

  Poly operator-() const {
    Poly r = *this;
    for (auto& v : r.c_) v = -v;
    return r;
  }
  Poly& operator+=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
    trim();
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
    trim();
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    std::vector<Rational> r(a.c_.size() + b.c_.size() - 1);
    for (size_t i = 0; i < a.c_.size(); ++i) {
      if (a.c_[i] == 0) continue;
      for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    }
    return Poly(std::move(r));
  }
  friend Poly operator*(const Rational& s, const Poly& p) { return p.scaled(s); }
  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly scaled(const Rational& s) const {
    if (s == 0) return Poly();
    Poly r = *this;
    for (auto& v : r.c_) v *= s;
    return r;
  }
  Poly times_x_pow(int k) const {
    if (is_zero() || k == 0) return *this;
    std::vector<Rational> r(c_.size() + k);
    std::copy(c_.begin(), c_.end(), r.begin() + k);
    return Poly(std::move(r));
  }
  /// Drops the lowest `k` coefficients (exact division by x^k when they vanish).
  Poly div_x_pow(int k) const {
    if (k >= static_cast<int>(c_.size())) return Poly();
    return Poly(std::vector<Rational>(c_.begin() + k, c_.end()));
  }
  Poly pow(int n) const {
    Poly r = constant(1), b = *this;
    while (n > 0) {
      if (n & 1) r = r * b;
      n >>= 1;
      if (n) b = b * b;
    }
    return r;
  }

  Rational operator()(const Rational& x) const {
    Rational r(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
    return r;
  }
  int sign_at(const Rational& x) const { return (*this)(x).sign(); }

  /// Horner evaluation in another arithmetic (double, complex, multiprecision float).
  template <class T, class Real = T>
  T eval(const T& x) const {
    T r(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + T(to_real<Real>(*it));
    return r;
  }

  template <class Real>
  std::vector<Real> coeffs_as() const {
    std::vector<Real> r;
    r.reserve(c_.size());
    for (const auto& v : c_) r.push_back(to_real<Real>(v));
    return r;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly();
    std::vector<Rational> r(c_.size() - 1);
    for (size_t i = 1; i < c_.size(); ++i) r[i - 1] = c_[i] * static_cast<long>(i);
    return Poly(std::move(r));
  }
  Poly monic() const { return is_zero() ? Poly() : scaled(1 / lead()); }

  /// x^n p(1/x) with n = degree.
  Poly reversed() const {
    std::vector<Rational> r(c_.rbegin(), c_.rend());
    return Poly(std::move(r));
  }
  /// p(s x).
  Poly rescaled(const Rational& s) const {
    Poly r = *this;
    Rational f(1);
    for (auto& v : r.c_) {
      v *= f;
      f *= s;
    }
    r.trim();
    return r;
  }

  std::string str(const char* var = "x") const {
    if (is_zero()) return "0";
    std::string out;
    for (int i = degree(); i >= 0; --i) {
      if (c_[i] == 0) continue;
      if (!out.empty()) out += " + ";
      out += "(" + to_string(c_[i]) + ")";
      if (i >= 1) out += std::string("*") + var;
      if (i >= 2) out += "^" + std::to_string(i);
    }
    return out;
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

inline std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b) {
  if (b.is_zero()) fail("DivisionByZeroFunction", "polynomial division by zero");
  if (a.degree() < b.degree()) return {Poly(), a};
  std::vector<Rational> rem = a.coeffs();
  std::vector<Rational> quo(a.degree() - b.degree() + 1);
  const Rational inv_lead = 1 / b.lead();
  const int db = b.degree();
  for (int i = a.degree(); i >= db; --i) {
    if (rem[i] == 0) continue;
    Rational f = rem[i] * inv_lead;
    quo[i - db] = f;
    for (int j = 0; j <= db; ++j) rem[i - db + j] -= f * b.coeff(j);
  }
  rem.resize(db);
  return {Poly(std::move(quo)), Poly(std::move(rem))};
}

inline Poly operator/(const Poly& a, const Poly& b) { return divmod(a, b).first; }
inline Poly operator%(const Poly& a, const Poly& b) { return divmod(a, b).second; }

/// Monic greatest common divisor; gcd(0, 0) = 0.
inline Poly gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = a % b;
    a = std::move(b);
    b = r.monic();
  }
  return a.monic();
}

/// Yun's decomposition: p = lead(p) * prod_k f[k-1]^k with each f monic and square-free.
inline std::vector<Poly> squarefree_decomposition(const Poly& p) {
  std::vector<Poly> out;
  if (p.degree() < 1) return out;
  Poly dp = p.derivative();
  Poly c = gcd(p, dp);
  Poly w = p / c;
  Poly y = dp / c;
  Poly z = y - w.derivative();
  while (w.degree() >= 1) {
    Poly g = gcd(w, z);
    out.push_back(g.monic());
    w = w / g;
    y = z / g;
    z = y - w.derivative();
  }
  while (!out.empty() && out.back().degree() < 1) out.pop_back();
  return out;
}

inline Poly squarefree_part(const Poly& p) {
  if (p.degree() < 1) return Poly::constant(1);
  return (p / gcd(p, p.derivative())).monic();
}

}  // namespace actree
