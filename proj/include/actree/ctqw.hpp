#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "actree/spectrum.hpp"

namespace actree {

/// Complex number over any real type (std::complex is only specified for builtin floats).
template <class Real>
struct Amp {
  Real re{0}, im{0};
  Amp& operator+=(const Amp& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Real norm() const { return re * re + im * im; }
  std::complex<double> to_complex() const { return {double(re), double(im)}; }
};

struct QuadratureOptions {
  int min_nodes = 512;
  double nodes_per_radian = 8;  // nodes per unit of phase variation
  double abs_tol = 1e-9;        // doubling N may change the result by at most abs + rel*|value|
  double rel_tol = 0;
  int max_doublings = 5;
};

/// A_t(u, v) = sqrt(sigma_u/sigma_v) [ sum_pp Res e^{i mu t} + int rho e^{i lambda t} d lambda ]
/// for H = -K. Amplitudes are kept scaled by (q-1)^{shift/2}, shift being the smallest kernel
/// power, so deep tree vertices stay in floating-point range.
template <class Real = double>
class AmplitudeEngine {
 public:
  struct Result {
    Amp<Real> scaled;
    int shift = 0;
    int nodes = 0;
    Real change{0};  // |I(N) - I(N/2)| of the accepted quadrature
  };

  AmplitudeEngine(const GeneratingBundle& bundle, const SpectrumReport& rep, const VertexAddress& u,
                  const VertexAddress& v, QuadratureOptions opt = {})
      : rho_(bundle, u, v), opt_(opt), q_(bundle.q()) {
    const auto& G = bundle.tree();
    shift_ = rho_.min_power();
    max_power_ = 0;
    for (const auto& t : rho_.terms()) max_power_ = std::max(max_power_, t.power);
    using std::pow;
    using std::sqrt;
    pref_ = sqrt(Real(G.sigma(u)) / Real(G.sigma(v)));
    const Real unscale = pow(Real(q_ - 1), Real(shift_) / 2);
    for (const auto& r : rep.pure_point) {
      Real res = point_residue<Real>(G, r, u, v) * unscale;
      if (res != 0) pp_.push_back({r.root.template value_as<Real>(), res});
    }
  }

  int shift() const { return shift_; }
  int q() const { return q_; }

  /// Point-mass part only (scaled).
  Amp<Real> point_part(const Real& t) const {
    using std::cos;
    using std::sin;
    Amp<Real> s;
    for (const auto& [mu, res] : pp_) {
      s.re += res * cos(mu * t);
      s.im += res * sin(mu * t);
    }
    s.re *= pref_;
    s.im *= pref_;
    return s;
  }

  /// Band integral only (scaled), midpoint rule in theta, doubled until two passes agree.
  Amp<Real> continuous_part(const Real& t, int* nodes = nullptr, Real* change = nullptr) const {
    using std::sqrt;
    const double c = a_value<double>(q_) / q_;
    const double phase = c * std::abs(double(t)) + max_power_;
    int N = std::max(opt_.min_nodes, static_cast<int>(std::ceil(opt_.nodes_per_radian * phase)));
    Sum prev = midpoint(t, N);
    for (int k = 0; k < opt_.max_doublings; ++k) {
      Sum cur = midpoint(t, 2 * prev.N);
      Amp<Real> a = cur.value(), b = prev.value();
      Real diff = sqrt((a.re - b.re) * (a.re - b.re) + (a.im - b.im) * (a.im - b.im));
      if (diff <= Real(opt_.abs_tol) + Real(opt_.rel_tol) * sqrt(a.norm())) {
        if (nodes) *nodes = cur.N;
        if (change) *change = diff;
        a.re *= pref_;
        a.im *= pref_;
        return a;
      }
      prev = cur;
    }
    fail("QuadratureNotConverged", "band integral at t = " + format_double(double(t)) + " did not converge with " +
                                       std::to_string(prev.N) + " nodes");
  }

  Result operator()(const Real& t) const {
    Result r;
    r.shift = shift_;
    r.scaled = continuous_part(t, &r.nodes, &r.change);
    r.scaled += point_part(t);
    return r;
  }

  /// Unscaled amplitude as a double complex (underflows for very deep vertices).
  std::complex<double> amplitude(double t) const {
    Result r = (*this)(Real(t));
    double f = std::pow(q_ - 1.0, -shift_ / 2.0);
    return r.scaled.to_complex() * f;
  }

  double probability(double t) const { return std::norm(amplitude(t)); }

 private:
  struct Sum {
    int N = 0;
    Real h{0};
    Real re{0}, im{0};
    Amp<Real> value() const { return {re * h, im * h}; }
  };

  // rho(theta) * (a/q) sin(theta) * e^{i t lambda(theta)}, scaled.
  void add_node(const Real& t, const Real& th, Real& re, Real& im) const {
    using std::cos;
    using std::sin;
    const Real c = a_value<Real>(q_) / q_;
    Real w = rho_.template at_theta<Real>(th, shift_) * c * sin(th);
    Real ph = t * c * cos(th);
    re += w * cos(ph);
    im += w * sin(ph);
  }

  // Midpoint rule: the even periodic extension is smooth, and the edges are never sampled.
  Sum midpoint(const Real& t, int N) const {
    Sum s;
    s.N = N;
    s.h = boost::math::constants::pi<Real>() / N;
    for (int k = 0; k < N; ++k) add_node(t, s.h * (Real(k) + Real(0.5)), s.re, s.im);
    return s;
  }

  PairDensity rho_;
  QuadratureOptions opt_;
  int q_;
  int shift_ = 0, max_power_ = 0;
  Real pref_{1};
  std::vector<std::pair<Real, Real>> pp_;  // (mu, scaled residue)
};

inline std::complex<double> amplitude(const GeneratingBundle& bundle, const SpectrumReport& rep, const VertexAddress& u,
                                      const VertexAddress& v, double t) {
  return AmplitudeEngine<double>(bundle, rep, u, v).amplitude(t);
}

/// Representatives of the vertices within distance R of u, grouped by tree symmetry:
/// every vertex of a class has the same amplitude from u.
struct VertexClass {
  VertexAddress rep;
  int distance = 0;
  double count = 1;
};

inline std::vector<VertexClass> ball_classes(const AsymptoticTree& G, const VertexAddress& u, int R) {
  G.validate(u);
  const auto& core = G.core();
  const int q = G.q();
  const int g0 = G.anchor(u);
  const int D = u.depth();
  std::vector<VertexClass> out;
  auto zeros = [](int n) { return std::vector<int>(std::max(n, 0), 0); };
  // Core vertices, then whole trees that do not contain u.
  for (int g = 0; g < core.size(); ++g) {
    int dg = D + core.distance(g0, g);
    if (dg <= R) out.push_back({VertexAddress::core(core.label(g)), dg, 1});
    for (int tr = 1; tr <= G.graft_count(g); ++tr) {
      if (u.in_tree && g == g0 && tr == u.tree) continue;
      for (int d = 1; dg + d <= R; ++d)
        out.push_back({VertexAddress::in(core.label(g), tr, zeros(d - 1)), dg + d, std::pow(q - 1.0, d - 1)});
    }
  }
  if (!u.in_tree) return out;
  // u's own tree: ancestors of u, descendants of u, and subtrees branching off u's path at depth k.
  for (int k = 1; k <= D; ++k) {
    std::vector<int> anc(u.path.begin(), u.path.begin() + (k - 1));
    if (D - k <= R) out.push_back({VertexAddress::in(u.label, u.tree, anc), D - k, 1});
    if (k == D) {
      for (int d = D + 1; d - D <= R; ++d) {
        auto p = u.path;
        auto z = zeros(d - D);
        p.insert(p.end(), z.begin(), z.end());
        out.push_back({VertexAddress::in(u.label, u.tree, p), d - D, std::pow(q - 1.0, d - D)});
      }
    } else if (q > 2) {
      int other = u.path[k - 1] == 0 ? 1 : 0;
      for (int d = k + 1; (D - k) + (d - k) <= R; ++d) {
        auto p = anc;
        p.push_back(other);
        auto z = zeros(d - k - 1);
        p.insert(p.end(), z.begin(), z.end());
        out.push_back({VertexAddress::in(u.label, u.tree, p), (D - k) + (d - k), (q - 2) * std::pow(q - 1.0, d - k - 1)});
      }
    }
  }
  return out;
}

/// Probability of finding the walk within distance R of u at each time.
inline std::vector<double> ball_probability(const GeneratingBundle& bundle, const SpectrumReport& rep,
                                            const VertexAddress& u, int R, const std::vector<double>& times,
                                            QuadratureOptions opt = {}) {
  std::vector<double> P(times.size(), 0.0);
  for (const auto& cls : ball_classes(bundle.tree(), u, R)) {
    AmplitudeEngine<double> eng(bundle, rep, u, cls.rep, opt);
    for (size_t k = 0; k < times.size(); ++k) P[k] += cls.count * eng.probability(times[k]);
  }
  return P;
}

inline double ball_probability(const GeneratingBundle& bundle, const SpectrumReport& rep, const VertexAddress& u,
                               int R, double t) {
  return ball_probability(bundle, rep, u, R, std::vector<double>{t})[0];
}

/// Sum over pure point records of the diagonal residue at u.
inline double trapping_probability(const SpectrumReport& rep, const AsymptoticTree& G, const VertexAddress& u) {
  double s = 0;
  for (const auto& r : rep.pure_point) s += point_residue<double>(G, r, u, u);
  return s;
}

/// Long-time mean of the ball probability: sum over records and ball vertices of
/// (sigma_u/sigma_v) Res^2. Tends to trapping_probability as R grows.
inline double ball_trapping_constant(const SpectrumReport& rep, const AsymptoticTree& G, const VertexAddress& u, int R) {
  double s = 0;
  for (const auto& cls : ball_classes(G, u, R))
    for (const auto& r : rep.pure_point) {
      double x = point_residue<double>(G, r, u, cls.rep);
      s += cls.count * double(G.sigma(u)) / G.sigma(cls.rep) * x * x;
    }
  return s;
}

struct DecayFit {
  double slope = 0;
  double stderr_ = 0;
  int points = 0;
};

struct FitOptions {
  double constant = 0;         // subtracted before taking |.|
  double window = 0;           // averaging window in t; 0 disables averaging
  double min_span_ratio = 10;  // t_max / t_min over the fitted points
  int fit_points = 40;         // log-spaced window centres; 0 fits every sample
};

/// Least-squares slope of log <|P - c|>_window against log t.
inline DecayFit decay_exponent_fit(const std::vector<double>& t, const std::vector<double>& P, FitOptions opt = {}) {
  if (t.size() != P.size() || t.size() < 10) fail("InsufficientDecade", "need at least 10 samples");
  const double t0 = t.front() + opt.window / 2, t1 = t.back() - opt.window / 2;
  if (!(t0 > 0) || t1 / t0 < opt.min_span_ratio * (1 - 1e-12))
    fail("InsufficientDecade", "samples span " + format_double(t1 / t0, 4) + ", need " + format_double(opt.min_span_ratio, 4));
  auto averaged = [&](double centre) {
    if (opt.window <= 0) {
      size_t k = std::lower_bound(t.begin(), t.end(), centre) - t.begin();
      return std::abs(P[std::min(k, t.size() - 1)] - opt.constant);
    }
    // Trapezoid average of |P - c| over [centre - w/2, centre + w/2].
    double lo = centre - opt.window / 2, hi = centre + opt.window / 2, acc = 0, len = 0;
    for (size_t k = 0; k + 1 < t.size(); ++k) {
      double a = std::max(t[k], lo), b = std::min(t[k + 1], hi);
      if (b <= a) continue;
      double fa = std::abs(P[k] - opt.constant), fb = std::abs(P[k + 1] - opt.constant);
      double span = t[k + 1] - t[k];
      double ya = fa + (fb - fa) * (a - t[k]) / span, yb = fa + (fb - fa) * (b - t[k]) / span;
      acc += 0.5 * (ya + yb) * (b - a);
      len += b - a;
    }
    return acc / len;
  };
  std::vector<double> X, Y;
  if (opt.fit_points > 0) {
    for (int k = 0; k < opt.fit_points; ++k) {
      double c = t0 * std::pow(t1 / t0, double(k) / (opt.fit_points - 1));
      X.push_back(std::log(c));
      Y.push_back(std::log(averaged(c)));
    }
  } else {
    for (size_t k = 0; k < t.size(); ++k)
      if (t[k] >= t0 && t[k] <= t1) {
        X.push_back(std::log(t[k]));
        Y.push_back(std::log(averaged(t[k])));
      }
  }
  const int n = static_cast<int>(X.size());
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
  }
  DecayFit f;
  f.slope = sxy / sxx;
  double sse = 0;
  for (int i = 0; i < n; ++i) {
    double r = Y[i] - my - f.slope * (X[i] - mx);
    sse += r * r;
  }
  f.stderr_ = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0;
  f.points = n;
  return f;
}

/// i^l J_l(t) = (1/2pi) int_{-pi}^{pi} e^{i t cos(theta) + i l theta} d theta, periodic trapezoid.
inline std::complex<double> bessel_reference(int l, double t) {
  int N = std::max(64, static_cast<int>(std::ceil(8 * (std::abs(t) + l))));
  auto sum = [&](int n) {
    std::complex<double> s = 0;
    for (int k = 0; k < n; ++k) {
      double th = -std::numbers::pi + 2 * std::numbers::pi * k / n;
      s += std::exp(std::complex<double>(0, t * std::cos(th) + l * th));
    }
    return s / double(n);
  };
  std::complex<double> a = sum(N), b = sum(2 * N);
  if (std::abs(a - b) > 1e-12) fail("QuadratureNotConverged", "Bessel reference did not converge");
  return b;
}

/// Large-t band contribution sqrt(sigma_u/sigma_v) sqrt(aq/(2 pi t^3)) [E+ e^{i(at/q + pi/4)} + E- e^{-i(at/q + pi/4)}].
struct StationaryPhaseTail {
  int q = 3;
  double prefactor = 1;  // sqrt(sigma_u/sigma_v)
  double edge_plus = 0, edge_minus = 0;  // E+- : effective Bt at lambda = +-a/q
  double bt_plus = 0, bt_minus = 0;      // Bt of the leading term at +-a/q

  std::complex<double> predicted(double t) const {
    double c = a_value<double>(q) / q;
    double k = prefactor * std::sqrt(a_value<double>(q) * q / (2 * std::numbers::pi * t * t * t));
    double ph = c * t + std::numbers::pi / 4;
    return k * (edge_plus * std::exp(std::complex<double>(0, ph)) + edge_minus * std::exp(std::complex<double>(0, -ph)));
  }
  double envelope(double t) const {
    return prefactor * std::sqrt(a_value<double>(q) * q / (2 * std::numbers::pi * t * t * t)) *
           (std::abs(edge_plus) + std::abs(edge_minus));
  }
};

inline StationaryPhaseTail stationary_phase_tail(const GeneratingBundle& bundle, const VertexAddress& u,
                                                 const VertexAddress& v) {
  const auto& G = bundle.tree();
  const int q = G.q();
  PairDensity rho(bundle, u, v);
  StationaryPhaseTail out;
  out.q = q;
  out.prefactor = std::sqrt(double(G.sigma(u)) / G.sigma(v));
  const double a = a_value<double>(q), c = a / q;
  const Poly rad = lambda_radicand(q);
  auto check = [&](const RationalFunction& f) {
    if (f.is_zero()) return;
    if (gcd(f.den(), rad).degree() >= 1) fail("BandEdgePole", "density coefficient is singular at the band edge");
  };
  bool first = true;
  for (const auto& t : rho.terms()) {
    check(t.B);
    check(t.Bt);
    double Bp = t.B.is_zero() ? 0 : t.B.eval<double>(c), Bm = t.B.is_zero() ? 0 : t.B.eval<double>(-c);
    double Tp = t.Bt.is_zero() ? 0 : t.Bt.eval<double>(c), Tm = t.Bt.is_zero() ? 0 : t.Bt.eval<double>(-c);
    double s = std::pow(q - 1.0, -t.power / 2.0);
    out.edge_plus += s * (Tp - t.power * Bp / a);
    out.edge_minus += (t.power % 2 ? -1 : 1) * s * (Tm + t.power * Bm / a);
    if (first) {
      out.bt_plus = Tp;
      out.bt_minus = Tm;
      first = false;
    }
  }
  return out;
}

/// Walk probability at depth round(nu t) along the all-zeros path of the first tree at a
/// graft vertex g, started from g, with the steepest-descent prediction.
struct FrontPoint {
  double t = 0;
  int depth = 0;
  double measured = 0;   // shell probability (q-1)^{d-1} |A_t|^2
  double predicted = 0;  // pointwise asymptotic value
  double envelope = 0;   // inside the cone: phase-averaged prediction; outside: same as predicted
  double log_measured = 0;  // natural log of measured (exact even when measured underflows)
};

inline int front_depth(double nu, double t) {
  double x = nu * t;
  double r = std::round(x);
  int d = std::abs(x - r) < 1e-9 ? static_cast<int>(r) : static_cast<int>(std::floor(x));
  if (d > 10000) fail("DepthOverflow", "depth " + std::to_string(d) + " exceeds 10^4");
  return std::max(d, 1);
}

inline FrontPoint front_profile(const GeneratingBundle& bundle, const SpectrumReport& rep, int g, double nu, double t) {
  const auto& G = bundle.tree();
  if (G.graft_count(g) < 1) fail("InvalidAddress", "front needs a graft vertex");
  const int q = G.q();
  const double a = a_value<double>(q), c = a / q;
  FrontPoint fp;
  fp.t = t;
  fp.depth = front_depth(nu, t);
  const int d = fp.depth;
  VertexAddress u = VertexAddress::core(G.core().label(g));
  VertexAddress v = VertexAddress::in(G.core().label(g), 1, std::vector<int>(d - 1, 0));
  // Measured: exact quadrature; 50 digits outside the cone where the value is exponentially small.
  if (nu > c) {
    QuadratureOptions opt;
    opt.abs_tol = 0;
    opt.rel_tol = 1e-9;
    AmplitudeEngine<Float50> eng(bundle, rep, u, v, opt);
    auto r = eng(Float50(t));
    Float50 p = r.scaled.norm() / Float50(q - 1);
    fp.log_measured = double(log(p));
    fp.measured = double(p);
  } else {
    AmplitudeEngine<double> eng(bundle, rep, u, v);
    auto r = eng(t);
    fp.measured = r.scaled.norm() / (q - 1);
    fp.log_measured = std::log(fp.measured);
  }
  // Prediction from the lambda-form M of the kernel coefficient (q/sigma_g) Q_{g,g}.
  LambdaForm M = (Rational(q, G.sigma(g)) * bundle.core_Q(g, g)).lambda_form();
  auto evalM = [&](std::complex<double> lam, Side side) {
    std::complex<double> B = M.B.eval<std::complex<double>, double>(lam);
    std::complex<double> Bt = M.Bt.is_zero() ? 0.0 : M.Bt.eval<std::complex<double>, double>(lam);
    return B + Bt * r_lambda<double>(q, lam, side);
  };
  const double shell = double(G.sigma(g)) / q / (q - 1);
  if (nu < c) {
    double th0 = std::asin(nu / c), lp = c * std::cos(th0);
    std::complex<double> M1 = evalM(lp, Side::Below), M2 = evalM(-lp, Side::Below);
    double psi1 = t * lp + d * th0 - std::numbers::pi / 4;
    double psi2 = -t * lp + d * (std::numbers::pi - th0) + std::numbers::pi / 4;
    std::complex<double> S = M1 * std::exp(std::complex<double>(0, psi1)) + M2 * std::exp(std::complex<double>(0, psi2));
    double k = shell * nu * nu / (2 * std::numbers::pi * t * lp);
    fp.predicted = k * std::norm(S);
    fp.envelope = k * (std::norm(M1) + std::norm(M2));
  } else {
    double th0 = std::acosh(nu / c), lam = c * std::sinh(th0);
    std::complex<double> Ms = evalM(std::complex<double>(0, -lam), Side::Auto);
    double phi = t * (nu * th0 - lam);
    double k = shell * nu * nu / (2 * std::numbers::pi * t * lam);
    fp.predicted = k * std::norm(Ms) * std::exp(-2 * phi);
    fp.envelope = fp.predicted;
  }
  return fp;
}

/// Exponential rate -2 (nu theta_0 - |lambda|) predicted outside the cone, theta_0 = arccosh(nu q / a).
inline double front_exterior_rate(int q, double nu) {
  double c = a_value<double>(q) / q;
  double th0 = std::acosh(nu / c);
  return -2 * (nu * th0 - c * std::sinh(th0));
}

}  // namespace actree
