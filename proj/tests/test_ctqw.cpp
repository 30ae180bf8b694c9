#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <numbers>

#include "actree/ctqw.hpp"

using namespace actree;

namespace {

AsymptoticTree spec(const std::string& name) { return load_graph_spec(std::string(ACTREE_SAMPLES_DIR) + "/" + name); }

VertexAddress core(const std::string& l) { return VertexAddress::core(l); }

VertexAddress chain_at(int l) {
  if (l == 0) return core("0");
  return VertexAddress::in("0", 1, std::vector<int>(l - 1, 0));
}

struct Loaded {
  AsymptoticTree G;
  GeneratingBundle b;
  SpectrumReport rep;
  explicit Loaded(const std::string& name) : G(spec(name)), b(G), rep(compute_spectrum(b)) {}
};

}  // namespace

TEST(Amplitude, IdentityAtTimeZero) {
  Loaded k4("k4_q10.json");
  auto a = core("a"), b = core("b");
  auto deep = VertexAddress::in("a", 1, {0, 1});
  EXPECT_NEAR(std::abs(amplitude(k4.b, k4.rep, a, a, 0) - 1.0), 0, 1e-10);
  EXPECT_NEAR(std::abs(amplitude(k4.b, k4.rep, a, b, 0)), 0, 1e-10);
  EXPECT_NEAR(std::abs(amplitude(k4.b, k4.rep, a, deep, 0)), 0, 1e-10);
  EXPECT_NEAR(std::abs(amplitude(k4.b, k4.rep, deep, deep, 0) - 1.0), 0, 1e-10);
}

TEST(Amplitude, ChainIsBessel) {
  // Frozen series values.
  EXPECT_NEAR(bessel_reference(0, 1).real(), 0.76519768655796655, 1e-12);
  EXPECT_NEAR(bessel_reference(1, 1).imag(), 0.44005058574493352, 1e-12);
  Loaded ch("chain.json");
  for (double t : {1.0, 5.0, 10.0, 30.0})
    for (int l : {0, 1, 5, 12}) {
      auto A = amplitude(ch.b, ch.rep, chain_at(0), chain_at(l), t);
      EXPECT_NEAR(std::abs(A), std::abs(boost::math::cyl_bessel_j(l, t)), 1e-9) << "t=" << t << " l=" << l;
      EXPECT_NEAR(std::abs(A - bessel_reference(l, t)), 0, 1e-9);
    }
}

TEST(Amplitude, TimeReversal) {
  Loaded k4("k4_q10.json");
  auto u = core("a"), v = VertexAddress::in("b", 1, {2});
  for (double t : {0.7, 3.0, 11.0}) {
    auto p = amplitude(k4.b, k4.rep, u, v, t), m = amplitude(k4.b, k4.rep, u, v, -t);
    EXPECT_NEAR(std::abs(p - std::conj(m)), 0, 1e-12);
  }
}

TEST(Ball, ClassesCountEveryVertex) {
  for (const char* name : {"k4_q10.json", "p3_trap.json", "cayley_t3.json", "chain.json"}) {
    auto G = spec(name);
    std::vector<VertexAddress> centres{VertexAddress::core(G.core().label(0))};
    for (int g = 0; g < G.core().size(); ++g)
      if (G.graft_count(g) > 0) {
        centres.push_back(VertexAddress::in(G.core().label(g), 1, {0, 0}));
        break;
      }
    for (const auto& u : centres)
      for (int R : {0, 1, 2, 4}) {
        double n = 0;
        for (const auto& c : ball_classes(G, u, R)) {
          EXPECT_EQ(distance(G, u, c.rep), c.distance);
          n += c.count;
        }
        EXPECT_EQ(n, double(truncated_ball(G, u, R).vertices.size())) << name << " " << u.str() << " R=" << R;
      }
  }
}

TEST(Ball, Unitarity) {
  Loaded t4("cayley_t4.json");
  const double t = 10;
  double c = t4.rep.band_edge();
  int R = static_cast<int>(std::ceil(c * t)) + 40;
  EXPECT_NEAR(ball_probability(t4.b, t4.rep, core("o"), R, t), 1.0, 1e-6);
  Loaded k4("k4_q10.json");
  EXPECT_NEAR(ball_probability(k4.b, k4.rep, VertexAddress::in("c", 1, {1}), R, 8.0), 1.0, 1e-6);
}

TEST(Trapping, EmbeddedEigenvalueHoldsHalf) {
  Loaded p3("p3_trap.json");
  EXPECT_NEAR(trapping_probability(p3.rep, p3.G, core("u")), 0.5, 1e-12);
  EXPECT_NEAR(ball_trapping_constant(p3.rep, p3.G, core("u"), 2), 0.5, 1e-12);
  // The grafted middle vertex carries no embedded weight.
  EXPECT_NEAR(trapping_probability(p3.rep, p3.G, core("v")), 0.0, 1e-12);
}

TEST(Trapping, ExteriorWeightLeaksIntoTrees) {
  Loaded k4("k4_q10.json");
  double diag = trapping_probability(k4.rep, k4.G, core("a"));
  double prev = 0;
  for (int R : {0, 1, 3, 8}) {
    double c = ball_trapping_constant(k4.rep, k4.G, core("a"), R);
    EXPECT_GE(c, prev - 1e-15);
    EXPECT_LE(c, diag + 1e-12);
    prev = c;
  }
  EXPECT_NEAR(prev, diag, 1e-6);
}

TEST(DecayFit, SyntheticPowerLaw) {
  std::vector<double> t, P;
  for (double x = 40; x <= 420; x += 0.05) {
    t.push_back(x);
    P.push_back(0.25 + std::pow(x, -3.0) * (1 + std::cos(1.7 * x)));
  }
  FitOptions opt;
  opt.constant = 0.25;
  opt.window = 2 * std::numbers::pi / 1.7;
  opt.min_span_ratio = 8;
  auto f = decay_exponent_fit(t, P, opt);
  EXPECT_NEAR(f.slope, -3, 0.01);
  opt.min_span_ratio = 10;
  EXPECT_THROW(decay_exponent_fit(t, P, opt), Error);
}

TEST(StationaryPhase, PureTreeTail) {
  Loaded t("cayley_t4.json");
  auto o = core("o");
  for (auto v : {o, VertexAddress::in("o", 1, {0})}) {
    auto tail = stationary_phase_tail(t.b, o, v);
    AmplitudeEngine<double> eng(t.b, t.rep, o, v);
    for (double s = 100; s <= 400; s += 7.3) {
      auto A = eng.amplitude(s);
      EXPECT_LE(std::abs(A - tail.predicted(s)), 0.1 * tail.envelope(s)) << v.str() << " t=" << s;
    }
    // t^{-3/2}: doubling time scales the envelope by 2^{-3/2}.
    EXPECT_NEAR(tail.envelope(200) / tail.envelope(100), std::pow(2.0, -1.5), 1e-12);
  }
}

TEST(StationaryPhase, CorrectionFallsLikeInverseTime) {
  Loaded t("cayley_t3.json");
  auto o = core("o");
  auto tail = stationary_phase_tail(t.b, o, o);
  AmplitudeEngine<double> eng(t.b, t.rep, o, o);
  auto rel = [&](double s) { return std::abs(eng.amplitude(s) - tail.predicted(s)) / tail.envelope(s); };
  EXPECT_NEAR(rel(800) / rel(1600), 2.0, 0.3);
  EXPECT_LT(rel(1600), 0.03);
}

TEST(StationaryPhase, TrappedResidual) {
  Loaded p3("p3_trap.json");
  auto u = core("u");
  auto tail = stationary_phase_tail(p3.b, u, u);
  AmplitudeEngine<double> eng(p3.b, p3.rep, u, u);
  auto rel = [&](double s) { return std::abs(eng.continuous_part(s).to_complex() - tail.predicted(s)) / tail.envelope(s); };
  EXPECT_LT(rel(1600), 0.05);
  EXPECT_LT(rel(1600), rel(400) / 2.5);
  EXPECT_NEAR(std::abs(eng.point_part(400).to_complex()), 0.5, 1e-12);
}

TEST(StationaryPhase, EdgePoleIsReported) {
  // q = 2: the density 1/(pi sqrt(1 - lambda^2)) is singular at the band edge.
  Loaded ch("chain.json");
  EXPECT_THROW(stationary_phase_tail(ch.b, core("0"), core("0")), Error);
}

TEST(Front, DepthRounding) {
  EXPECT_EQ(front_depth(0.3, 200), 60);
  EXPECT_EQ(front_depth(0.9, 400), 360);
  EXPECT_EQ(front_depth(0.35, 3), 1);
  EXPECT_THROW(front_depth(100, 1000), Error);
}

TEST(Front, InteriorAndExterior) {
  Loaded k4("k4_q10.json");
  auto in = front_profile(k4.b, k4.rep, 0, 0.3, 200);
  EXPECT_EQ(in.depth, 60);
  EXPECT_GT(in.measured, 0);
  EXPECT_LT(std::abs(std::log(in.measured / in.predicted)), 0.5);
  auto a = front_profile(k4.b, k4.rep, 0, 0.9, 100), b = front_profile(k4.b, k4.rep, 0, 0.9, 200);
  double rate = (b.log_measured - a.log_measured) / 100;
  EXPECT_NEAR(rate, front_exterior_rate(10, 0.9), 0.05 * std::abs(front_exterior_rate(10, 0.9)));
}
