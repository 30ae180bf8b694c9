#pragma once

#include <optional>
#include <vector>

#include "actree/roots.hpp"
#include "actree/surd.hpp"

namespace actree {

struct ResidueOptions {
  /// Isolating intervals are bisected below this width (exact rationals) before
  /// switching to 100-digit floating point.
  int refine_bits = 200;
  /// Taylor coefficients below this fraction of their term scale count as zero.
  double zero_rel = 1e-40;
};

namespace detail {

/// Coefficients of p(mu + h) in powers of h, up to h^order.
inline std::vector<Float100> taylor_at(const Poly& p, const Float100& mu, int order) {
  std::vector<Float100> c = p.coeffs_as<Float100>();
  std::vector<Float100> out;
  // Repeated synthetic division by (x - mu).
  for (int k = 0; k <= order; ++k) {
    if (c.empty()) {
      out.emplace_back(0);
      continue;
    }
    Float100 r = c.back();
    std::vector<Float100> q(c.size() - 1);
    for (int i = static_cast<int>(c.size()) - 2; i >= 0; --i) {
      q[i] = r;
      r = r * mu + c[i];
    }
    out.push_back(r);
    c = std::move(q);
  }
  return out;
}

/// Coefficients of sign * sqrt(R(mu + h)) for a polynomial radicand R with R(mu) > 0.
inline std::vector<Float100> sqrt_taylor(const std::vector<Float100>& R, int sign, int order) {
  std::vector<Float100> y(order + 1);
  if (R[0] <= 0) fail("IntegrityFailure", "square root expanded at a branch point");
  y[0] = sign * sqrt(R[0]);
  for (int k = 1; k <= order; ++k) {
    Float100 acc = k < static_cast<int>(R.size()) ? R[k] : Float100(0);
    for (int j = 1; j < k; ++j) acc -= y[j] * y[k - j];
    y[k] = acc / (2 * y[0]);
  }
  return y;
}

}  // namespace detail

/// Residue of (U + V*root)/W at an isolated real root of W, where root = sign*sqrt(radicand)
/// is analytic there. Throws NotAPole or HigherOrderPole.
inline Float100 residue_combined(const CombinedForm& f, const Poly& radicand, int root_sign, IsolatedRoot root,
                                 const ResidueOptions& opt = {}) {
  int m = 0;
  auto factors = squarefree_decomposition(f.W);
  for (size_t k = 0; k < factors.size(); ++k) {
    if (factors[k].degree() >= 1 && is_root_of(root, factors[k])) {
      m = static_cast<int>(k) + 1;
      break;
    }
  }
  if (m == 0) fail("NotAPole", "denominator does not vanish at the root");
  root.refine(Rational(1) / IsolatedRoot::pow2(opt.refine_bits));
  Float100 mu = root.value_as<Float100>();
  auto U = detail::taylor_at(f.U, mu, m);
  auto V = detail::taylor_at(f.V, mu, m);
  auto W = detail::taylor_at(f.W, mu, m);
  auto R = detail::taylor_at(radicand, mu, m);
  auto y = detail::sqrt_taylor(R, root_sign, m);
  for (int k = 0; k < m; ++k) {
    Float100 h = U[k], scale = abs(U[k]);
    for (int j = 0; j <= k; ++j) {
      h += V[j] * y[k - j];
      scale += abs(V[j] * y[k - j]);
    }
    bool zero = abs(h) <= opt.zero_rel * scale;
    if (k < m - 1 && !zero)
      fail("HigherOrderPole", "pole of order " + std::to_string(m - k) + " at " + std::to_string(root.value()));
    if (k == m - 1) {
      if (zero) fail("NotAPole", "numerator vanishes to the order of the denominator");
      return h / W[m];
    }
  }
  fail("IntegrityFailure", "unreachable");
}

/// Residue of f at a real root. For Variable::Lambda the function is lambda^-1 f(1/lambda)
/// and the root must lie outside the cut; for Variable::Z it must lie in |z| < q/a.
inline Float100 residue_at_hp(const SurdFunction& f, const IsolatedRoot& root, Variable var,
                              const ResidueOptions& opt = {}) {
  const int q = f.q();
  IsolatedRoot r = root;
  if (var == Variable::Lambda) {
    int s = compare_square(r, a_squared(q) / Rational(q * q));
    if (s <= 0) fail("OnBranchCut", "lambda-residue requested inside the band");
    LambdaForm lf = f.lambda_form();
    return residue_combined(CombinedForm::from(lf.B, lf.Bt), lambda_radicand(q), r.midpoint().sign(), r, opt);
  }
  if (compare_square(r, Rational(q * q) / a_squared(q)) >= 0) fail("OnBranchCut", "z-residue requested outside |z| < q/a");
  return residue_combined(CombinedForm::from(f.rat(), f.surd()), z_radicand(q), 1, r, opt);
}

inline double residue_at(const SurdFunction& f, const IsolatedRoot& root, Variable var,
                         const ResidueOptions& opt = {}) {
  return residue_at_hp(f, root, var, opt).convert_to<double>();
}

/// Residue, or nullopt when the point is certified not to be a pole.
inline std::optional<Float100> residue_or_none(const CombinedForm& f, const Poly& radicand, int root_sign,
                                               const IsolatedRoot& root, const ResidueOptions& opt = {}) {
  try {
    return residue_combined(f, radicand, root_sign, root, opt);
  } catch (const Error& e) {
    if (e.code() == "NotAPole") return std::nullopt;
    throw;
  }
}

}  // namespace actree
