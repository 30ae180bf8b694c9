#pragma once

#include <vector>

#include "actree/poly.hpp"

namespace actree {

/// Sturm chain of a square-free polynomial.
class SturmChain {
 public:
  explicit SturmChain(const Poly& f) {
    chain_.push_back(f);
    if (f.degree() < 1) return;
    chain_.push_back(f.derivative());
    while (true) {
      Poly r = -(chain_[chain_.size() - 2] % chain_.back());
      if (r.is_zero()) break;
      // Positive rescaling keeps signs and limits coefficient growth.
      chain_.push_back(r.scaled(1 / abs(r.lead())));
    }
  }

  int variations(const Rational& x) const {
    int count = 0, prev = 0;
    for (const auto& p : chain_) {
      int s = p.sign_at(x);
      if (s == 0) continue;
      if (prev != 0 && s != prev) ++count;
      prev = s;
    }
    return count;
  }

  /// Number of distinct real roots in the half-open interval (lo, hi].
  int count(const Rational& lo, const Rational& hi) const {
    return variations(lo) - variations(hi);
  }

  const Poly& poly() const { return chain_.front(); }

 private:
  std::vector<Poly> chain_;
};

/// A real algebraic number: the unique root of a square-free `poly` in (lo, hi),
/// or exactly `lo` when `exact` is set.
struct IsolatedRoot {
  Poly poly;
  Rational lo, hi;
  bool exact = false;
  int multiplicity = 1;  // within the polynomial the root was extracted from

  Rational midpoint() const { return exact ? lo : (lo + hi) / 2; }
  /// Double approximation (refines a copy to width 2^-64 first).
  double value() const {
    if (exact) return lo.convert_to<double>();
    IsolatedRoot c = *this;
    c.refine(Rational(1) / pow2(64));
    return c.midpoint().convert_to<double>();
  }
  static Rational pow2(unsigned k) { return Rational(BigInt(1) << k); }
  Rational width() const { return hi - lo; }

  template <class Real>
  Real value_as() const {
    return to_real<Real>(midpoint());
  }

  /// Bisects until the enclosing interval is narrower than `width`.
  void refine(const Rational& width) {
    if (exact) return;
    const int s_hi = poly.sign_at(hi);
    while (hi - lo > width) {
      Rational mid = (lo + hi) / 2;
      int s = poly.sign_at(mid);
      if (s == 0) {
        lo = hi = mid;
        exact = true;
        return;
      }
      if (s == s_hi) hi = mid; else lo = mid;
    }
  }

  /// Refines until the sign of (root - x) is decided; returns -1, 0 or +1.
  int compare(const Rational& x) {
    while (true) {
      if (exact) return (lo - x).sign();
      if (x <= lo) return 1;
      if (x >= hi) return -1;
      if (poly.sign_at(x) == 0) return 0;
      refine(width() / 2);
    }
  }
};

namespace detail {

inline void isolate(const SturmChain& sc, const Rational& lo, const Rational& hi, int n,
                    std::vector<IsolatedRoot>& out) {
  if (n == 0) return;
  const Poly& f = sc.poly();
  if (n == 1) {
    IsolatedRoot r{f, lo, hi, false, 1};
    if (f.sign_at(hi) == 0) {
      r.lo = hi;
      r.exact = true;
    }
    out.push_back(std::move(r));
    return;
  }
  Rational mid = (lo + hi) / 2;
  int left = sc.count(lo, mid);
  isolate(sc, lo, mid, left, out);
  isolate(sc, mid, hi, n - left, out);
}

}  // namespace detail

/// Distinct real roots of square-free `f` in the open interval (lo, hi), ascending.
inline std::vector<IsolatedRoot> isolate_roots(const Poly& f, const Rational& lo, const Rational& hi) {
  std::vector<IsolatedRoot> out;
  if (f.degree() < 1) return out;
  SturmChain sc(f);
  std::vector<IsolatedRoot> raw;
  detail::isolate(sc, lo, hi, sc.count(lo, hi), raw);
  for (auto& r : raw) {
    if (r.exact && r.lo == hi) continue;
    out.push_back(std::move(r));
  }
  return out;
}

/// Real roots of an arbitrary polynomial in (lo, hi) with multiplicities, ascending.
inline std::vector<IsolatedRoot> real_roots(const Poly& p, const Rational& lo, const Rational& hi) {
  std::vector<IsolatedRoot> out;
  auto factors = squarefree_decomposition(p);
  for (size_t k = 0; k < factors.size(); ++k) {
    if (factors[k].degree() < 1) continue;
    for (auto& r : isolate_roots(factors[k], lo, hi)) {
      r.multiplicity = static_cast<int>(k) + 1;
      out.push_back(std::move(r));
    }
  }
  // Roots of different factors are distinct: refine until the intervals separate.
  for (size_t i = 0; i < out.size(); ++i)
    for (size_t j = i + 1; j < out.size(); ++j)
      while (out[i].lo < out[j].hi && out[j].lo < out[i].hi) {
        out[i].refine(out[i].width() / 2);
        out[j].refine(out[j].width() / 2);
      }
  std::sort(out.begin(), out.end(), [](const IsolatedRoot& a, const IsolatedRoot& b) { return a.lo < b.lo; });
  return out;
}

/// sign(mu^2 - c2) for the root mu, refining as needed. Fails if mu^2 = c2 cannot be
/// excluded at width 2^-400 (which only happens when mu^2 = c2 exactly for irrational mu).
inline int compare_square(IsolatedRoot& r, const Rational& c2) {
  while (true) {
    if (r.exact) return (r.lo * r.lo - c2).sign();
    if (r.lo >= 0 || r.hi <= 0) {
      Rational near = r.lo >= 0 ? r.lo : r.hi, far = r.lo >= 0 ? r.hi : r.lo;
      if (near * near >= c2) return 1;
      if (far * far <= c2) return -1;
    }
    if (r.width() < Rational(1) / IsolatedRoot::pow2(400)) fail("IntegrityFailure", "cannot separate root from the band edge");
    r.refine(r.width() / 2);
  }
}

/// Whether the root isolated in `r` is also a root of `g`.
inline bool is_root_of(const IsolatedRoot& r, const Poly& g) {
  if (g.is_zero()) return true;
  if (r.exact) return g.sign_at(r.lo) == 0;
  Poly h = gcd(g, r.poly);
  if (h.degree() < 1) return false;
  SturmChain sc(h);
  int n = sc.count(r.lo, r.hi);
  if (h.sign_at(r.hi) == 0) --n;
  return n > 0;
}

}  // namespace actree
