#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "actree/generating.hpp"
#include "actree/io.hpp"
#include "actree/linalg.hpp"
#include "actree/residue.hpp"

namespace actree {

enum class Location { Exterior, Embedded };
enum class Origin { Pole, CoreConstrained };

inline const char* to_string(Location l) { return l == Location::Exterior ? "exterior" : "embedded"; }
inline const char* to_string(Origin o) { return o == Origin::Pole ? "pole" : "core_constrained"; }

using ResidueMatrix = std::vector<std::vector<Float100>>;

/// One eigenvalue of K^G with its spectral projection restricted to the core.
struct EigenvalueRecord {
  IsolatedRoot root;  // exact when the eigenvalue is rational
  double value = 0;
  Location location = Location::Exterior;
  Origin origin = Origin::Pole;
  int multiplicity = 0;
  // residues[u][v] = Res F_{u,v} = <v|e|u>, so sigma_u residues[u][v] is symmetric.
  ResidueMatrix residues;
  std::optional<RationalMatrix> exact_residues;

  std::optional<Rational> exact_value() const {
    if (root.exact) return root.lo;
    return std::nullopt;
  }
};

struct SpectrumOptions {
  ResidueOptions residue;
  double rank_zero = 1e-9;
  double rank_ambiguous_lo = 1e-11, rank_ambiguous_hi = 1e-7;
};

struct SpectrumReport {
  int q = 3;
  std::vector<std::string> labels;
  std::vector<int> sigma;
  std::vector<EigenvalueRecord> pure_point;
  std::vector<LambdaForm> diagonal_forms;  // B and Bt of every core Q_{u,u}

  double band_edge() const { return a_value<double>(q) / q; }
  int total_multiplicity() const {
    int m = 0;
    for (const auto& r : pure_point) m += r.multiplicity;
    return m;
  }
  int exterior_multiplicity() const {
    int m = 0;
    for (const auto& r : pure_point)
      if (r.location == Location::Exterior) m += r.multiplicity;
    return m;
  }
};

/// a^2/q^2, the squared band edge.
inline Rational band_edge_squared(int q) { return a_squared(q) / Rational(q * q); }

/// Exact a/q when q-1 is a perfect square.
inline std::optional<Rational> band_edge_rational(int q) {
  long r = std::lround(std::sqrt(static_cast<double>(q - 1)));
  if (r * r != q - 1) return std::nullopt;
  return Rational(2 * r, q);
}

namespace detail {

/// Rational within 1e-12 of the root that is provably equal to it, if any.
inline void detect_rational(IsolatedRoot& r) {
  if (r.exact) return;
  Rational c;
  if (!best_rational(r.value(), 1e-12, 1000000, c)) return;
  if (c > r.lo && c < r.hi && r.poly(c) == 0) {
    r.lo = r.hi = c;
    r.exact = true;
  }
}

inline Eigen::MatrixXd gram(const ResidueMatrix& R, const std::vector<int>& sigma) {
  const int n = static_cast<int>(R.size());
  Eigen::MatrixXd M(n, n);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      M(u, v) = 0.5 * (sigma[u] * R[u][v] + sigma[v] * R[v][u]).convert_to<double>();
  return M;
}

}  // namespace detail

/// Numerical rank of the Gram matrix sigma_u R[u][v] (positive semidefinite).
inline int residue_rank(const ResidueMatrix& R, const std::vector<int>& sigma, const SpectrumOptions& opt = {}) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::gram(R, sigma));
  const auto& ev = es.eigenvalues();
  double top = ev.cwiseAbs().maxCoeff();
  if (top == 0) return 0;
  int rank = 0;
  for (int i = 0; i < ev.size(); ++i) {
    double rel = std::abs(ev[i]) / top;
    if (rel >= opt.rank_ambiguous_lo && rel <= opt.rank_ambiguous_hi)
      fail("RankAmbiguous", "Gram eigenvalue ratio " + format_double(rel, 3) + " inside the ambiguity window");
    if (rel > opt.rank_zero) ++rank;
  }
  return rank;
}

/// Whether two isolated roots are the same real number.
inline bool same_root(IsolatedRoot a, IsolatedRoot b) {
  if (a.exact && b.exact) return a.lo == b.lo;
  if (a.exact) std::swap(a, b);
  if (b.exact) return a.poly.sign_at(b.lo) == 0 && b.lo > a.lo && b.lo < a.hi;
  if (!is_root_of(a, b.poly)) return false;
  // b.poly has exactly one root in (b.lo, b.hi); a's root is one of b.poly's roots.
  return a.compare(b.lo) > 0 && a.compare(b.hi) < 0;
}

/// Exterior poles of the lambda-forms of a matrix of core generating functions, with
/// residue matrices and Gram-rank multiplicities. Used for G and for every G-sequence stage.
inline std::vector<EigenvalueRecord> exterior_poles(const std::vector<std::vector<SurdFunction>>& F,
                                                    const std::vector<int>& sigma, int q,
                                                    const SpectrumOptions& opt = {}) {
  const int n = static_cast<int>(F.size());
  std::vector<std::vector<CombinedForm>> forms(n, std::vector<CombinedForm>(n));
  Poly cand = Poly::constant(1);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      LambdaForm lf = F[u][v].lambda_form();
      forms[u][v] = CombinedForm::from(lf.B, lf.Bt);
      if (u == v) {
        Poly d = squarefree_part(lf.B.den() * lf.Bt.den());
        cand = cand * (d / gcd(cand, d));
      }
    }
  // Band edges are not eigenvalues; drop any factor vanishing there.
  const Poly rad = lambda_radicand(q);
  for (Poly g = gcd(cand, rad); g.degree() >= 1; g = gcd(cand, rad)) cand = cand / g;

  const Rational edge2 = band_edge_squared(q);
  std::vector<EigenvalueRecord> out;
  for (IsolatedRoot root : isolate_roots(cand, Rational(-9, 8), Rational(9, 8))) {
    if (compare_square(root, edge2) <= 0) continue;
    root.refine(Rational(1) / IsolatedRoot::pow2(opt.residue.refine_bits));
    const int sgn = root.midpoint().sign();
    ResidueMatrix R(n, std::vector<Float100>(n, Float100(0)));
    bool any = false;
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        auto r = residue_or_none(forms[u][v], rad, sgn, root, opt.residue);
        if (r) {
          R[u][v] = *r;
          any = any || *r != 0;
        }
      }
    if (!any) continue;
    for (int u = 0; u < n; ++u) {
      if (R[u][u] < 0 && abs(R[u][u]) > Float100(1e-30))
        fail("IntegrityFailure", "negative diagonal residue at lambda = " + format_double(root.value()));
      for (int v = 0; v < n; ++v) {
        Float100 a = sigma[u] * R[u][v], b = sigma[v] * R[v][u];
        if (abs(a - b) > Float100(1e-40) * (1 + abs(a)))
          fail("IntegrityFailure", "residue matrix violates sigma-symmetry");
      }
    }
    EigenvalueRecord rec;
    rec.multiplicity = residue_rank(R, sigma, opt);
    if (rec.multiplicity == 0) continue;
    detail::detect_rational(root);
    rec.root = root;
    rec.value = root.value();
    rec.location = Location::Exterior;
    rec.origin = Origin::Pole;
    rec.residues = std::move(R);
    out.push_back(std::move(rec));
  }
  return out;
}

/// Exterior pure point spectrum of G from the poles of its core generating functions.
inline std::vector<EigenvalueRecord> exterior_eigenvalues(const GeneratingBundle& bundle,
                                                          const SpectrumOptions& opt = {}) {
  const auto& G = bundle.tree();
  if (G.q() < 3) fail("DegreeTooSmall", "exterior eigenvalues need q >= 3");
  const int n = G.core_size();
  std::vector<std::vector<SurdFunction>> F(n, std::vector<SurdFunction>(n, SurdFunction(G.q())));
  std::vector<int> sigma(n);
  for (int u = 0; u < n; ++u) {
    sigma[u] = G.sigma(u);
    for (int v = 0; v < n; ++v) F[u][v] = bundle.core_Q(u, v);
  }
  return exterior_poles(F, sigma, G.q(), opt);
}

/// Eigenfunctions of the core transition matrix that vanish on V_0, for one eigenvalue.
struct EmbeddedSpace {
  IsolatedRoot root;
  double value = 0;
  int core_multiplicity = 0;  // multiplicity as an eigenvalue of the core matrix
  int dimension = 0;          // d_0(lambda)
  // Orthonormal basis of D^{-1/2}-scaled eigenfunctions psi; phi = D^{1/2} psi.
  std::vector<std::vector<double>> psi;
  std::optional<RationalMatrix> exact_basis;  // phi vectors, for rational lambda
};

/// Exact eigenvalues (with multiplicities) of the core transition matrix.
inline std::vector<IsolatedRoot> core_eigenvalues(const AsymptoticTree& G,
                                                  DegreeConvention conv = DegreeConvention::Standalone) {
  auto roots = real_roots(characteristic_polynomial(core_transition_matrix(G, conv)), Rational(-2), Rational(2));
  for (auto& r : roots) detail::detect_rational(r);
  return roots;
}

/// All eigenvalues of K^{G^(0)} with eigenfunctions vanishing on V_0, in and out of the band.
inline std::vector<EmbeddedSpace> constrained_core_spaces(const AsymptoticTree& G,
                                                          DegreeConvention conv = DegreeConvention::InG) {
  const auto& core = G.core();
  const int n = core.size();
  RationalMatrix K = core_transition_matrix(G, conv);
  std::vector<double> deg(n);
  for (int i = 0; i < n; ++i) deg[i] = conv == DegreeConvention::InG ? G.sigma(i) : core.degree(i);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : core.edges()) S(i, j) = S(j, i) = 1.0 / std::sqrt(deg[i] * deg[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);

  std::vector<EmbeddedSpace> out;
  for (IsolatedRoot root : core_eigenvalues(G, conv)) {
    const double mu = root.value();
    std::vector<int> idx;
    for (int k = 0; k < n; ++k)
      if (std::abs(es.eigenvalues()[k] - mu) < 1e-8) idx.push_back(k);
    if (static_cast<int>(idx.size()) != root.multiplicity)
      fail("ToleranceAmbiguity", "numerical eigenspace at " + format_double(mu) + " has dimension " +
                                     std::to_string(idx.size()) + ", expected " + std::to_string(root.multiplicity));
    const int m = root.multiplicity;
    Eigen::MatrixXd Psi(n, m);
    for (int c = 0; c < m; ++c) Psi.col(c) = es.eigenvectors().col(idx[c]);
    const auto& v0 = G.graft_vertices();
    Eigen::MatrixXd C(v0.size(), m);
    for (size_t r = 0; r < v0.size(); ++r) C.row(r) = Psi.row(v0[r]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
    int rank = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k) {
      double s = svd.singularValues()[k];
      if (s >= 1e-11 && s <= 1e-7)
        fail("ToleranceAmbiguity", "constraint singular value " + format_double(s, 3) + " at " + format_double(mu));
      if (s > 1e-9) ++rank;
    }
    const int d0 = m - rank;
    if (d0 == 0) continue;
    EmbeddedSpace sp;
    sp.root = root;
    sp.value = mu;
    sp.core_multiplicity = m;
    sp.dimension = d0;
    Eigen::MatrixXd basis = Psi * svd.matrixV().rightCols(d0);
    for (int c = 0; c < d0; ++c) {
      std::vector<double> col(n);
      for (int i = 0; i < n; ++i) col[i] = basis(i, c);
      sp.psi.push_back(std::move(col));
    }
    if (root.exact) {
      RationalMatrix A = K;
      for (int i = 0; i < n; ++i) A[i][i] -= root.lo;
      for (int g : v0) {
        std::vector<Rational> row(n);
        row[g] = 1;
        A.push_back(std::move(row));
      }
      RationalMatrix ns = nullspace(A, n);
      if (static_cast<int>(ns.size()) != d0)
        fail("ToleranceAmbiguity", "exact constrained nullspace at " + to_string(root.lo) + " has dimension " +
                                       std::to_string(ns.size()) + ", numerical " + std::to_string(d0));
      sp.exact_basis = std::move(ns);
    }
    out.push_back(std::move(sp));
  }
  return out;
}

/// Embedded eigenvalues: constrained core eigenvalues inside [-a/q, a/q].
inline std::vector<EmbeddedSpace> embedded_eigenvalues(const AsymptoticTree& G) {
  std::vector<EmbeddedSpace> out;
  for (auto& sp : constrained_core_spaces(G, DegreeConvention::InG))
    if (compare_square(sp.root, band_edge_squared(G.q())) <= 0) out.push_back(std::move(sp));
  return out;
}

/// Spectral projection of an embedded eigenvalue as a core residue matrix.
inline EigenvalueRecord embedded_record(const AsymptoticTree& G, const EmbeddedSpace& sp) {
  const int n = G.core_size();
  EigenvalueRecord rec;
  rec.root = sp.root;
  rec.value = sp.value;
  rec.location = Location::Embedded;
  rec.origin = Origin::CoreConstrained;
  rec.multiplicity = sp.dimension;
  rec.residues.assign(n, std::vector<Float100>(n, Float100(0)));
  if (sp.exact_basis) {
    // E = B M^-1 B^T D^-1 with M_ij = sum_x b_i(x) b_j(x) / sigma_x; R[u][v] = E[v][u].
    const auto& B = *sp.exact_basis;
    const int d = static_cast<int>(B.size());
    RationalMatrix M(d, std::vector<Rational>(d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int x = 0; x < n; ++x) M[i][j] += B[i][x] * B[j][x] / G.sigma(x);
    RationalMatrix Mi = inverse(M);
    RationalMatrix R(n, std::vector<Rational>(n));
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        Rational s = 0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s += B[i][v] * Mi[i][j] * B[j][u];
        R[u][v] = s / G.sigma(u);
        rec.residues[u][v] = to_real<Float100>(R[u][v]);
      }
    rec.exact_residues = std::move(R);
  } else {
    for (const auto& psi : sp.psi)
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
          rec.residues[u][v] += psi[u] * psi[v] * std::sqrt(double(G.sigma(v)) / G.sigma(u));
  }
  return rec;
}

/// Full pure point spectrum plus the density coefficient functions of every core vertex.
inline SpectrumReport compute_spectrum(const GeneratingBundle& bundle, const SpectrumOptions& opt = {}) {
  const auto& G = bundle.tree();
  SpectrumReport rep;
  rep.q = G.q();
  rep.labels = G.core().labels();
  for (int u = 0; u < G.core_size(); ++u) {
    rep.sigma.push_back(G.sigma(u));
    rep.diagonal_forms.push_back(bundle.core_Q(u, u).lambda_form());
  }
  // For q = 2 the band is [-1, 1] and there is no exterior region.
  if (G.q() >= 3) rep.pure_point = exterior_eigenvalues(bundle, opt);
  for (const auto& sp : embedded_eigenvalues(G)) rep.pure_point.push_back(embedded_record(G, sp));
  std::sort(rep.pure_point.begin(), rep.pure_point.end(),
            [](const EigenvalueRecord& a, const EigenvalueRecord& b) { return a.value < b.value; });
  return rep;
}

/// xi^-1 = lambda P(1/lambda) = (q lambda - r(lambda)) / (2(q-1)) outside the band.
template <class Real>
Real xi_inverse(int q, const Real& lambda) {
  using std::sqrt;
  Real r2 = Real(q) * Real(q) * lambda * lambda - Real(4 * (q - 1));
  if (r2 <= 0) fail("NotExterior", "xi^-1 is real only outside the band");
  Real r = sqrt(r2);
  if (lambda < 0) r = -r;
  return (Real(q) * lambda - r) / Real(2 * (q - 1));
}

/// Residue of F_{u,v} at a record for arbitrary addresses, from the core residues.
template <class Real = Float100>
Real point_residue(const AsymptoticTree& G, const EigenvalueRecord& rec, const VertexAddress& u,
                   const VertexAddress& v) {
  const int gu = G.anchor(u), gv = G.anchor(v);
  Real base = Real(rec.residues[gu][gv]);
  if (!u.in_tree && !v.in_tree) return base;
  if (rec.location == Location::Embedded) return Real(0);
  const int q = G.q();
  const Real x = xi_inverse<Real>(q, rec.root.template value_as<Real>());
  using std::pow;
  if (!u.in_tree) return Real(q) / G.sigma(gv) * base * pow(x, v.depth());
  if (!v.in_tree) return base * pow(x, u.depth());
  return Real(q) / G.sigma(gv) * base * pow(x, u.depth() + v.depth());
}

/// The continuous part of the spectral measure of one vertex pair, term by term:
/// F_{u,v} = sum_k (B_k + Bt_k r) g^{n_k} with g = (z^-1 P)(1/lambda).
class PairDensity {
 public:
  struct Term {
    RationalFunction B, Bt;
    int power;
  };

  PairDensity(const GeneratingBundle& bundle, const VertexAddress& u, const VertexAddress& v) : q_(bundle.q()) {
    for (const auto& t : bundle.kernel(u, v).terms) {
      LambdaForm lf = t.coeff.lambda_form();
      terms_.push_back({lf.B, lf.Bt, t.power});
    }
    // Converting GMP coefficients dominates the quadrature cost, so keep float copies.
    for (const auto& t : terms_) {
      cache_d_.push_back(Coeffs<double>::of(t));
      cache_50_.push_back(Coeffs<Float50>::of(t));
    }
  }

  int q() const { return q_; }
  const std::vector<Term>& terms() const { return terms_; }
  int min_power() const {
    int m = terms_.front().power;
    for (const auto& t : terms_) m = std::min(m, t.power);
    return m;
  }

  /// rho(lambda(theta)) / sin(theta) with lambda = (a/q) cos(theta); finite at the edges.
  /// `shift` scales every term by (q-1)^{shift/2}, which keeps deep-tree values in range.
  template <class Real>
  Real reduced(const Real& theta, int shift = 0) const {
    using std::cos;
    using std::pow;
    const Real c = cos(theta);
    const Real a = a_value<Real>(q_);
    const Real lam = a / q_ * c;
    const Real pi = boost::math::constants::pi<Real>();
    Real sum(0);
    for (const auto& t : terms_) {
      // T_n(cos theta) and U_{n-1}(cos theta) = sin(n theta)/sin(theta) by recurrence.
      Real t0(1), t1 = c, u0(0), u1(1);  // T_0, T_1, U_{-1}, U_0
      for (int k = 1; k < t.power; ++k) {
        Real t2 = 2 * c * t1 - t0, u2 = 2 * c * u1 - u0;
        t0 = t1;
        t1 = t2;
        u0 = u1;
        u1 = u2;
      }
      const Real Tn = t.power == 0 ? t0 : t1, Un = t.power == 0 ? u0 : u1;
      Real Bv, Btv;
      if constexpr (std::is_same_v<Real, double>) {
        Bv = cache_d_[&t - terms_.data()].B(lam);
        Btv = cache_d_[&t - terms_.data()].Bt(lam);
      } else if constexpr (std::is_same_v<Real, Float50>) {
        Bv = cache_50_[&t - terms_.data()].B(lam);
        Btv = cache_50_[&t - terms_.data()].Bt(lam);
      } else {
        Bv = t.B.is_zero() ? Real(0) : t.B.template eval<Real>(lam);
        Btv = t.Bt.is_zero() ? Real(0) : t.Bt.template eval<Real>(lam);
      }
      Real scale = pow(Real(q_ - 1), Real(shift - t.power) / 2);
      sum += scale * (Bv * Un - a * Btv * Tn);
    }
    return sum / pi;
  }

  template <class Real>
  Real at_theta(const Real& theta, int shift = 0) const {
    using std::sin;
    return reduced(theta, shift) * sin(theta);
  }

  /// rho_{u,v}(lambda) for |lambda| <= a/q.
  double operator()(double lambda) const {
    double c = a_value<double>(q_) / q_;
    if (std::abs(lambda) > c * (1 + 1e-15)) fail("OutsideBand", "lambda = " + format_double(lambda) + " is outside the band");
    double r = at_theta(std::acos(std::clamp(lambda / c, -1.0, 1.0)));
    if (!std::isfinite(r)) fail("EmbeddedPointMass", "density evaluated at an embedded eigenvalue");
    return r;
  }

 private:
  template <class Real>
  struct Coeffs {
    std::vector<Real> bn, bd, tn, td;
    static Real horner(const std::vector<Real>& c, const Real& x) {
      Real r(0);
      for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
      return r;
    }
    Real B(const Real& x) const { return bn.empty() ? Real(0) : horner(bn, x) / horner(bd, x); }
    Real Bt(const Real& x) const { return tn.empty() ? Real(0) : horner(tn, x) / horner(td, x); }
    static Coeffs of(const Term& t) {
      Coeffs c;
      if (!t.B.is_zero()) {
        c.bn = t.B.num().template coeffs_as<Real>();
        c.bd = t.B.den().template coeffs_as<Real>();
      }
      if (!t.Bt.is_zero()) {
        c.tn = t.Bt.num().template coeffs_as<Real>();
        c.td = t.Bt.den().template coeffs_as<Real>();
      }
      return c;
    }
  };

  std::vector<Coeffs<double>> cache_d_;
  std::vector<Coeffs<Float50>> cache_50_;
  int q_;
  std::vector<Term> terms_;
};

inline double density(const GeneratingBundle& bundle, const VertexAddress& u, const VertexAddress& v, double lambda) {
  return PairDensity(bundle, u, v)(lambda);
}

/// (q-1)^{-l/2} (2 T_l(cos theta) + (q-2) U_l(cos theta)) / q, the distance-l density ratio on T_q.
inline double cayley_pair_density(int q, int l, double theta) {
  double c = std::cos(theta);
  double t0 = 1, t1 = c, u0 = 1, u1 = 2 * c;
  double T = 1, U = 1;
  if (l >= 1) {
    for (int k = 1; k < l; ++k) {
      double t2 = 2 * c * t1 - t0, u2 = 2 * c * u1 - u0;
      t0 = t1;
      t1 = t2;
      u0 = u1;
      u1 = u2;
    }
    T = t1;
    U = u1;
  }
  return std::pow(q - 1.0, -l / 2.0) * (2 * T + (q - 2) * U) / q;
}

/// Integral of rho over the band by the midpoint rule in theta, doubling until converged.
inline double band_integral(const PairDensity& rho, double tol = 1e-13) {
  const double c = a_value<double>(rho.q()) / rho.q();
  auto integrate = [&](int N) {
    double h = std::numbers::pi / N, s = 0;
    for (int k = 0; k < N; ++k) {
      double th = (k + 0.5) * h;
      double sn = std::sin(th);
      s += rho.reduced(th) * sn * sn;
    }
    return s * h * c;
  };
  double prev = integrate(128);
  for (int N = 256; N <= (1 << 20); N *= 2) {
    double cur = integrate(N);
    if (std::abs(cur - prev) < tol) return cur;
    prev = cur;
  }
  fail("QuadratureNotConverged", "band integral did not converge");
}

struct Completeness {
  double point_mass = 0, continuous = 0;
  double total() const { return point_mass + continuous; }
};

inline Completeness completeness(const SpectrumReport& rep, const GeneratingBundle& bundle, const VertexAddress& u) {
  Completeness c;
  for (const auto& r : rep.pure_point) c.point_mass += point_residue<double>(bundle.tree(), r, u, u);
  c.continuous = band_integral(PairDensity(bundle, u, u));
  return c;
}

/// Core restriction of an eigenbasis: vectors phi with sum_i phi_i(u) phi_i(v) = sigma_u R[u][v].
inline std::vector<std::vector<double>> core_eigenfunctions(const EigenvalueRecord& rec, const std::vector<int>& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(detail::gram(rec.residues, sigma));
  const auto& ev = es.eigenvalues();
  double top = ev.cwiseAbs().maxCoeff();
  std::vector<std::vector<double>> out;
  for (int k = static_cast<int>(ev.size()) - 1; k >= 0; --k) {
    if (ev[k] <= 1e-9 * top) continue;
    std::vector<double> phi(ev.size());
    for (int i = 0; i < ev.size(); ++i) phi[i] = es.eigenvectors()(i, k) * std::sqrt(ev[k]);
    out.push_back(std::move(phi));
  }
  return out;
}

/// An exterior eigenfunction extended from the core: phi = (q/sigma_g) phi(g) xi^{-d} on the
/// trees at g.
struct EigenfunctionExtension {
  const AsymptoticTree* G = nullptr;
  double lambda = 0;
  double xi_inv = 0;
  std::vector<double> core_values;
  bool square_summable = false;  // (q-1) xi^-2 < 1

  double operator()(const VertexAddress& a) const {
    int g = G->anchor(a);
    if (!a.in_tree) return core_values[g];
    return double(G->q()) / G->sigma(g) * core_values[g] * std::pow(xi_inv, a.depth());
  }

  /// max |(K phi)(x) - lambda phi(x)| over vertices at distance < R from `center`.
  double residual(const VertexAddress& center, int R) const {
    auto T = truncated_ball(*G, center, R);
    double worst = 0;
    for (size_t k = 0; k < T.vertices.size(); ++k) {
      if (T.boundary[k]) continue;
      double s = 0;
      for (const auto& nb : neighbors(*G, T.vertices[k])) s += (*this)(nb) / G->sigma(nb);
      worst = std::max(worst, std::abs(s - lambda * (*this)(T.vertices[k])));
    }
    return worst;
  }
};

inline EigenfunctionExtension eigenfunction_extension(const AsymptoticTree& G, double lambda,
                                                      std::vector<double> core_values) {
  double c = a_value<double>(G.q()) / G.q();
  if (std::abs(lambda) <= c) fail("NotExterior", "lambda = " + format_double(lambda) + " lies in the band");
  if (static_cast<int>(core_values.size()) != G.core_size()) fail("InvalidArgument", "one value per core vertex");
  EigenfunctionExtension e;
  e.G = &G;
  e.lambda = lambda;
  e.xi_inv = xi_inverse<double>(G.q(), lambda);
  e.core_values = std::move(core_values);
  e.square_summable = (G.q() - 1) * e.xi_inv * e.xi_inv < 1;
  return e;
}

/// Exterior-multiplicity bounds and the total-multiplicity bound for one instance.
struct PointBoundsVerdict {
  int core_exterior = 0;   // exterior multiplicity of the standalone core
  int graft_vertices = 0;  // #V_0
  int exterior = 0;        // exterior multiplicity of G
  int total = 0;           // all of S_pp
  int core_size = 0;
  bool lower_ok = false, upper_ok = false, total_ok = false;
  bool ok() const { return lower_ok && upper_ok && total_ok; }
  std::string str() const {
    return std::to_string(core_exterior) + " - 2*" + std::to_string(graft_vertices) + " <= " + std::to_string(exterior) +
           " <= " + std::to_string(core_exterior) + "; total " + std::to_string(total) + " <= " + std::to_string(core_size);
  }
};

inline int core_exterior_multiplicity(const AsymptoticTree& G) {
  int m = 0;
  for (auto r : core_eigenvalues(G, DegreeConvention::Standalone))
    if (compare_square(r, band_edge_squared(G.q())) > 0) m += r.multiplicity;
  return m;
}

inline PointBoundsVerdict verify_point_bounds(const SpectrumReport& rep, const AsymptoticTree& G) {
  PointBoundsVerdict v;
  v.core_exterior = core_exterior_multiplicity(G);
  v.graft_vertices = static_cast<int>(G.graft_vertices().size());
  v.exterior = rep.exterior_multiplicity();
  v.total = rep.total_multiplicity();
  v.core_size = G.core_size();
  v.lower_ok = v.core_exterior - 2 * v.graft_vertices <= v.exterior;
  v.upper_ok = v.exterior <= v.core_exterior;
  v.total_ok = v.total <= v.core_size;
  return v;
}

/// Multiplicities along the G-sequence against the three cases of the multiplicity recursion:
/// d^G = d^B - 1 at old poles of Q^B_{v0}, d^B + 1 at new poles of Q^G_{v0}, d^B otherwise.
struct RecursionCheck {
  bool ok = true;
  std::vector<std::string> mismatches;
};

inline std::vector<EigenvalueRecord> stage_exterior(const GeneratingBundle& b, int stage,
                                                    const SpectrumOptions& opt = {}) {
  const int n = b.tree().core_size();
  std::vector<std::vector<SurdFunction>> F(n, std::vector<SurdFunction>(n, SurdFunction(b.q())));
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) F[u][v] = b.stage_Q(stage, u, v);
  return exterior_poles(F, b.stage_degrees(stage), b.q(), opt);
}

inline RecursionCheck multiplicity_recursion_check(const GeneratingBundle& b, const SpectrumOptions& opt = {}) {
  RecursionCheck out;
  std::vector<EigenvalueRecord> prev = stage_exterior(b, 0, opt);
  for (int i = 0; i < static_cast<int>(b.sequence().size()); ++i) {
    const int v0 = b.sequence()[i];
    std::vector<EigenvalueRecord> cur = stage_exterior(b, i + 1, opt);
    auto find = [](const std::vector<EigenvalueRecord>& recs, const IsolatedRoot& r) -> const EigenvalueRecord* {
      for (const auto& x : recs)
        if (same_root(x.root, r)) return &x;
      return nullptr;
    };
    std::vector<IsolatedRoot> all;
    for (const auto& r : prev) all.push_back(r.root);
    for (const auto& r : cur)
      if (!find(prev, r.root)) all.push_back(r.root);
    for (const auto& lam : all) {
      const EigenvalueRecord* B = find(prev, lam);
      const EigenvalueRecord* Gr = find(cur, lam);
      int dB = B ? B->multiplicity : 0, dG = Gr ? Gr->multiplicity : 0;
      bool old_pole = B && abs(B->residues[v0][v0]) > Float100(1e-30);
      bool new_pole = Gr && abs(Gr->residues[v0][v0]) > Float100(1e-30);
      int predicted = old_pole ? dB - 1 : new_pole ? dB + 1 : dB;
      if (predicted != dG) {
        out.ok = false;
        out.mismatches.push_back("stage " + std::to_string(i + 1) + " lambda " + format_double(lam.value()) +
                                 ": predicted " + std::to_string(predicted) + ", measured " + std::to_string(dG));
      }
    }
    prev = std::move(cur);
  }
  return out;
}

/// x + y sqrt(m) with rational x, y.
struct QuadraticSurd {
  Rational x, y;
  Rational m;
  QuadraticSurd operator+(const QuadraticSurd& o) const { return {x + o.x, y + o.y, m}; }
  QuadraticSurd operator*(const QuadraticSurd& o) const { return {x * o.x + m * y * o.y, x * o.y + y * o.x, m}; }
  int sign() const {
    int sx = x.sign(), sy = y.sign();
    if (sy == 0) return sx;
    if (sx == 0 || sx == sy) return sx == 0 ? sy : sx;
    Rational d = x * x - m * y * y;
    return sx * d.sign();
  }
};

namespace detail {

inline QuadraticSurd eval_at_surd(const Poly& p, const QuadraticSurd& z) {
  QuadraticSurd acc{Rational(0), Rational(0), z.m};
  for (int i = p.degree(); i >= 0; --i) acc = acc * z + QuadraticSurd{p.coeff(i), Rational(0), z.m};
  return acc;
}

/// sign of c0 + c1 * R(z) at z = x + y sqrt(m); fails if the denominator vanishes.
inline int sign_affine_at(const RationalFunction& R, const QuadraticSurd& z, const Rational& c0, const Rational& c1) {
  QuadraticSurd N = eval_at_surd(R.num(), z), D = eval_at_surd(R.den(), z);
  Rational norm = D.x * D.x - D.m * D.y * D.y;
  if (norm == 0) fail("BandEdgePole", "Q^B_{v0} has a pole at the band edge z = +-q/a");
  // c0 + c1 N/D = (c0 D conj(D) + c1 N conj(D)) / norm
  QuadraticSurd conj{D.x, -D.y, D.m};
  QuadraticSurd top = QuadraticSurd{c0 * norm, Rational(0), D.m} + QuadraticSurd{c1, Rational(0), D.m} * N * conj;
  return top.sign() * norm.sign();
}

}  // namespace detail

/// Poles of f(z) in (-q/a, q/a), confirmed by a nonzero residue.
inline std::vector<IsolatedRoot> z_poles(const SurdFunction& f, const ResidueOptions& opt = {}) {
  const int q = f.q();
  CombinedForm cf = CombinedForm::from(f.rat(), f.surd());
  Poly cand = squarefree_part(cf.W);
  const Poly rad = z_radicand(q);
  for (Poly g = gcd(cand, rad); g.degree() >= 1; g = gcd(cand, rad)) cand = cand / g;
  const Rational edge2 = Rational(q * q) / a_squared(q);
  std::vector<IsolatedRoot> out;
  for (IsolatedRoot r : isolate_roots(cand, Rational(-q), Rational(q))) {
    if (compare_square(r, edge2) >= 0) continue;
    auto res = residue_or_none(cf, rad, 1, r, opt);
    if (res && *res != 0) out.push_back(r);
  }
  return out;
}

/// Structure of the new poles created by grafting p trees at v0.
struct InterlacingReport {
  std::vector<double> z, w, z_star, w_star;  // z ascending > 0, w descending < 0
  bool interlace_ok = true;   // exactly one new pole between consecutive old ones
  bool gap_ok = true;         // no new pole in (w_1, z_1)
  int tail_pos = 0, tail_neg = 0;
  bool tail_pos_predicted = false, tail_neg_predicted = false;  // condition (137) at +-q/a
  bool tails_ok = true;
  bool monotone_ok = true;    // d/dz [z Q^B] > 0 between poles
  bool ok() const { return interlace_ok && gap_ok && tails_ok && monotone_ok; }
};

inline InterlacingReport interlacing_check(const SurdFunction& QB_v0, int sigma, int p, int q) {
  if (q < 3) fail("DegreeTooSmall", "interlacing needs q >= 3");
  InterlacingReport rep;
  auto old_poles = z_poles(QB_v0);
  auto all_new = z_poles(alpha_p(QB_v0, sigma, p, q));
  std::vector<IsolatedRoot> fresh;
  for (const auto& r : all_new) {
    bool seen = false;
    for (const auto& o : old_poles) seen = seen || same_root(r, o);
    if (!seen) fresh.push_back(r);
  }
  for (const auto& r : old_poles) (r.value() > 0 ? rep.z : rep.w).push_back(r.value());
  for (const auto& r : fresh) (r.value() > 0 ? rep.z_star : rep.w_star).push_back(r.value());
  std::sort(rep.z.begin(), rep.z.end());
  std::sort(rep.w.begin(), rep.w.end(), std::greater<>());
  std::sort(rep.z_star.begin(), rep.z_star.end());
  std::sort(rep.w_star.begin(), rep.w_star.end(), std::greater<>());

  const double edge = q / a_value<double>(q);
  auto count_in = [](const std::vector<double>& xs, double lo, double hi) {
    return static_cast<int>(std::count_if(xs.begin(), xs.end(), [&](double x) { return x > lo && x < hi; }));
  };
  for (size_t i = 0; i + 1 < rep.z.size(); ++i)
    if (count_in(rep.z_star, rep.z[i], rep.z[i + 1]) != 1) rep.interlace_ok = false;
  for (size_t j = 0; j + 1 < rep.w.size(); ++j)
    if (count_in(rep.w_star, rep.w[j + 1], rep.w[j]) != 1) rep.interlace_ok = false;
  double zlo = rep.w.empty() ? -edge : rep.w.front(), zhi = rep.z.empty() ? edge : rep.z.front();
  if (count_in(rep.z_star, zlo, zhi) + count_in(rep.w_star, zlo, zhi) != 0) rep.gap_ok = false;

  // Condition (137) at z = +-q/a, where s vanishes: p Q^B(+-q/a)/sigma + (2q-2)/(q-2) > 0.
  Rational m(q - 1), c = Rational(q, 2 * (q - 1));
  auto condition = [&](int sgn) {
    QuadraticSurd z{Rational(0), Rational(sgn) * c, m};
    if (!QB_v0.surd().is_zero()) {
      QuadraticSurd D = detail::eval_at_surd(QB_v0.surd().den(), z);
      if (D.x * D.x - m * D.y * D.y == 0) fail("BandEdgePole", "surd part of Q^B_{v0} is singular at the band edge");
    }
    return detail::sign_affine_at(QB_v0.rat(), z, Rational(2 * q - 2, q - 2), Rational(p, sigma)) > 0;
  };
  // With no old poles on a side the tail interval is covered by the gap check.
  if (!rep.z.empty()) {
    rep.tail_pos_predicted = condition(+1);
    rep.tail_pos = count_in(rep.z_star, rep.z.back(), edge);
    rep.tails_ok = rep.tails_ok && rep.tail_pos == (rep.tail_pos_predicted ? 1 : 0);
  }
  if (!rep.w.empty()) {
    rep.tail_neg_predicted = condition(-1);
    rep.tail_neg = count_in(rep.w_star, -edge, rep.w.back());
    rep.tails_ok = rep.tails_ok && rep.tail_neg == (rep.tail_neg_predicted ? 1 : 0);
  }

  SurdFunction zQ = SurdFunction::rational(q, RationalFunction(Poly{Rational(0), Rational(1)})) * QB_v0;
  SurdFunction dzQ = zQ.derivative();
  std::vector<double> cuts{-edge};
  for (auto it = rep.w.rbegin(); it != rep.w.rend(); ++it) cuts.push_back(*it);
  for (double z : rep.z) cuts.push_back(z);
  cuts.push_back(edge);
  for (size_t k = 0; k + 1 < cuts.size(); ++k)
    for (int s = 0; s < 16; ++s) {
      double z = cuts[k] + (cuts[k + 1] - cuts[k]) * (s + 0.5) / 16;
      // Part by part at high precision: the combined form loses digits at high degree.
      Float100 zz(z);
      Float100 sz = sqrt(Float100(q * q) - to_real<Float100>(a_squared(q)) * zz * zz);
      Float100 val = dzQ.rat().eval<Float100>(zz) + dzQ.surd().eval<Float100>(zz) * sz;
      if (!(val > 0)) rep.monotone_ok = false;
    }
  return rep;
}

/// Section 4.1 predictions for a complete core K_n with p trees at every vertex.
struct CompleteCoreMode {
  std::string mode;  // "constant" or "degenerate"
  int multiplicity = 1;
  double xi_inv = 0;
  double lambda = 0;
  std::optional<Rational> exact_xi_inv, exact_lambda;
};

struct CompleteCorePrediction {
  std::vector<CompleteCoreMode> modes;  // only the square-summable ones
  Rational discriminant;                // of the degenerate-mode quadratic
  bool cg4 = false;                     // 1 + sqrt(q-1) < q(n-1)/(p+n-1)
  bool uniform = false;                 // q > 4(n-1 + (p^2-1)/(n-1))(n+p-1)
};

inline CompleteCorePrediction complete_core_predictions(int n, int p, int q) {
  if (n < 2 || p < 1 || q < 3) fail("InvalidArgument", "need n >= 2, p >= 1, q >= 3");
  CompleteCorePrediction out;
  const int sigma = n - 1 + p;
  const int k = q * (n - 1) - sigma;
  if (k != 0) {
    Rational x(sigma, k);
    if ((q - 1) * x * x < 1) {
      Rational lam = (Rational(n - 1) + p * x) / sigma;
      out.modes.push_back({"constant", 1, x.convert_to<double>(), lam.convert_to<double>(), x, lam});
    }
  }
  out.discriminant = Rational(q * q - 4 * q * (n - 1) * sigma + 4 * sigma * sigma);
  if (out.discriminant >= 0 && k != 0) {
    double sq = std::sqrt(out.discriminant.convert_to<double>());
    for (int s : {+1, -1}) {
      double x = (-q + s * sq) / (2.0 * k);
      if ((q - 1) * x * x < 1) out.modes.push_back({"degenerate", n - 1, x, (p * x - 1) / sigma, {}, {}});
    }
  }
  // 1 + sqrt(q-1) < q(n-1)/sigma  <=>  sqrt(q-1) < R with R = q(n-1)/sigma - 1.
  Rational R = Rational(q * (n - 1), sigma) - 1;
  out.cg4 = R > 0 && R * R > q - 1;
  out.uniform = Rational(q) > 4 * (Rational(n - 1) + Rational(p * p - 1, n - 1)) * (n + p - 1);
  std::sort(out.modes.begin(), out.modes.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  return out;
}

/// Predictions for a (q-p)-regular core with p trees at every vertex.
struct QRegularPair {
  double lambda = 0;        // core eigenvalue
  int multiplicity = 1;     // in the core
  double s = 0;
  double lambda_prime = 0;  // eigenvalue of K^G
  std::optional<Rational> exact_lambda_prime;
  double back_substituted = 0;  // lambda recovered from lambda_prime
};

struct QRegularPrediction {
  bool empty_certified = false;
  std::string certificate;
  std::vector<QRegularPair> pairs;
};

/// lambda from lambda' by the back-substitution relation.
inline double qregular_lambda_of(double lambda_prime, int p, int q) {
  double a2 = 4.0 * (q - 1);
  double root = std::sqrt(std::max(0.0, q * q * lambda_prime * lambda_prime - a2));
  double sgn = lambda_prime < 0 ? -1 : 1;
  return (lambda_prime * q * (2 * q - 2 - p) + sgn * p * root) / (2.0 * (q - 1) * (q - p));
}

struct CoreEigenvalue {
  double value;
  int multiplicity;
};

inline QRegularPrediction qregular_predictions(const std::vector<CoreEigenvalue>& core, int p, int q) {
  QRegularPrediction out;
  // p > q-1-sqrt(q-1)  <=>  q-1-p < 0  or  (q-1-p)^2 < q-1
  const int d = q - 1 - p;
  if (d < 0 || d * d < q - 1) {
    out.empty_certified = true;
    out.certificate = "p = " + std::to_string(p) + " > q-1-sqrt(q-1) since (q-1-p)^2 = " + std::to_string(d * d) +
                      " < q-1 = " + std::to_string(q - 1);
    return out;
  }
  const double threshold = (2.0 * q - 2 - p) / ((q - p) * std::sqrt(q - 1.0));
  const double shift = std::atanh(double(p) / (2.0 * q - p - 2));
  for (const auto& e : core) {
    if (std::abs(e.value) <= threshold) continue;
    double s = std::acosh(std::abs(e.value) * (q - p) / (2 * std::sqrt(q - p - 1.0))) - shift;
    if (s < 0) continue;
    QRegularPair pr;
    pr.lambda = e.value;
    pr.multiplicity = e.multiplicity;
    pr.s = s;
    pr.lambda_prime = (e.value < 0 ? -1 : 1) * a_value<double>(q) / q * std::cosh(s);
    if (std::abs(e.value - 1) < 1e-12) {
      Rational lp = 1 - Rational(p * (q - p - 2), q * (q - p - 1));
      pr.exact_lambda_prime = lp;
      pr.lambda_prime = lp.convert_to<double>();
    }
    pr.back_substituted = qregular_lambda_of(pr.lambda_prime, p, q);
    out.pairs.push_back(pr);
  }
  if (out.pairs.empty()) out.certificate = "no core eigenvalue passes the admissibility bound";
  return out;
}

inline QRegularPrediction qregular_predictions(const AsymptoticTree& G) {
  const int q = G.q();
  const int p = G.graft_count(0);
  for (int i = 0; i < G.core_size(); ++i)
    if (G.graft_count(i) != p || G.sigma(i) != q)
      fail("NotRegularCore", "core must be (q-p)-regular with p trees at every vertex");
  std::vector<CoreEigenvalue> ev;
  for (const auto& r : core_eigenvalues(G, DegreeConvention::Standalone)) ev.push_back({r.value(), r.multiplicity});
  return qregular_predictions(ev, p, q);
}

inline json spectrum_to_json(const SpectrumReport& rep) {
  json j;
  j["q"] = rep.q;
  auto edge = band_edge_rational(rep.q);
  std::string exact = edge ? to_string(*edge) : "sqrt(" + std::to_string(4 * (rep.q - 1)) + ")/" + std::to_string(rep.q);
  j["band"] = {{"lower", "-" + exact}, {"upper", exact},
               {"lower_decimal", format_double(-rep.band_edge(), 17)}, {"upper_decimal", format_double(rep.band_edge(), 17)}};
  j["vertices"] = rep.labels;
  j["degrees"] = rep.sigma;
  json pp = json::array();
  for (const auto& r : rep.pure_point) {
    json e;
    e["value"] = format_double(r.value, 17);
    if (auto x = r.exact_value()) e["exact"] = to_string(*x);
    else e["exact"] = nullptr;
    e["interval"] = {to_string(r.root.lo), to_string(r.root.hi)};
    e["location"] = to_string(r.location);
    e["origin"] = to_string(r.origin);
    e["multiplicity"] = r.multiplicity;
    json R = json::array();
    for (const auto& row : r.residues) {
      json jr = json::array();
      for (const auto& x : row) jr.push_back(format_double(x.convert_to<double>(), 17));
      R.push_back(jr);
    }
    e["residues"] = R;
    if (r.exact_residues) {
      json X = json::array();
      for (const auto& row : *r.exact_residues) {
        json jr = json::array();
        for (const auto& x : row) jr.push_back(to_string(x));
        X.push_back(jr);
      }
      e["exact_residues"] = X;
    }
    pp.push_back(e);
  }
  j["pure_point"] = pp;
  json dens = json::object();
  for (size_t u = 0; u < rep.labels.size(); ++u)
    dens[rep.labels[u]] = {{"B", ratfunc_to_json(rep.diagonal_forms[u].B)}, {"Bt", ratfunc_to_json(rep.diagonal_forms[u].Bt)}};
  j["density_coefficients"] = dens;
  return j;
}

}  // namespace actree
