#include <gtest/gtest.h>

#include <random>

#include "actree/generating.hpp"
#include "actree/residue.hpp"

using namespace actree;

namespace {

SurdFunction random_surd(std::mt19937_64& rng, int q) {
  std::uniform_int_distribution<int> d(-5, 5);
  auto rp = [&](int deg) {
    std::vector<Rational> c;
    for (int i = 0; i <= deg; ++i) c.emplace_back(d(rng), 1 + std::abs(d(rng)));
    return Poly(std::move(c));
  };
  Poly den = rp(2);
  if (den.is_zero()) den = Poly::constant(1);
  Poly den2 = rp(1);
  if (den2.is_zero()) den2 = Poly::constant(1);
  return SurdFunction(RationalFunction(rp(2), den), RationalFunction(rp(1), den2), q);
}

std::complex<double> sum_series(const std::vector<Rational>& c, std::complex<double> z) {
  std::complex<double> acc = 0, zp = 1;
  for (const auto& x : c) {
    acc += x.convert_to<double>() * zp;
    zp *= z;
  }
  return acc;
}

}  // namespace

TEST(Surd, SquareOfSIsRational) {
  SurdFunction s = SurdFunction::s(3);
  SurdFunction s2 = s * s;
  EXPECT_TRUE(s2.surd().is_zero());
  EXPECT_EQ(s2.rat(), RationalFunction(Poly{Rational(9), Rational(0), Rational(-8)}));
}

TEST(Surd, AdditiveIdentityAndInverse) {
  std::mt19937_64 rng(3);
  SurdFunction f = random_surd(rng, 4);
  EXPECT_EQ(f + SurdFunction(4), f);
  EXPECT_TRUE((f + (-f)).is_zero());
}

TEST(Surd, ConjugateDivision) {
  SurdFunction one = SurdFunction::constant(3, 1);
  SurdFunction f = one + SurdFunction::s(3);
  SurdFunction inv = f.inverse();
  // (1 - s)/(8z^2 - 8)
  RationalFunction d(Poly::constant(1), Poly{Rational(-8), Rational(0), Rational(8)});
  EXPECT_EQ(inv, SurdFunction(d, -d, 3));
  EXPECT_EQ(inv * f, one);
}

TEST(Surd, FieldAxiomsRandomized) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 25; ++t) {
    int q = 3 + t % 3;
    SurdFunction f = random_surd(rng, q), g = random_surd(rng, q), h = random_surd(rng, q);
    if (g.is_zero()) continue;
    EXPECT_EQ((f * g) / g, f);
    EXPECT_EQ((f * g) * h, f * (g * h));
    EXPECT_EQ(f * (g + h), f * g + f * h);
    EXPECT_EQ(f - g + g, f);
  }
}

TEST(Surd, MismatchedQAndZeroDivision) {
  EXPECT_THROW(SurdFunction::s(3) + SurdFunction::s(4), Error);
  try {
    (void)(SurdFunction::s(3) / SurdFunction(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "DivisionByZeroFunction");
  }
}

TEST(Surd, SeriesOfCayleyQ) {
  auto c = cayley_Q(4).series(4);
  std::vector<Rational> expect{1, 0, Rational(1, 4), 0, Rational(7, 64)};
  EXPECT_EQ(c, expect);
  EXPECT_EQ(cayley_step(4).series(1)[1], Rational(1, 4));
  EXPECT_EQ(SurdFunction::constant(5, 1).series(3), (std::vector<Rational>{1, 0, 0, 0}));
}

TEST(Surd, SeriesRejectsPoleAtOrigin) {
  SurdFunction f = SurdFunction::rational(3, RationalFunction(Poly::constant(1), Poly{Rational(0), Rational(1)}));
  try {
    f.series(3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "PoleAtOrigin");
  }
}

TEST(Surd, SeriesOfProductIsCauchyProduct) {
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int t = 0; t < 20 && checked < 8; ++t) {
    SurdFunction f = random_surd(rng, 3 + t % 3), g = random_surd(rng, 3 + t % 3);
    std::vector<Rational> a, b;
    try {
      a = f.series(20);
      b = g.series(20);
    } catch (const Error&) {
      continue;
    }
    auto c = (f * g).series(20);
    for (int n = 0; n <= 20; ++n) {
      Rational acc(0);
      for (int k = 0; k <= n; ++k) acc += a[k] * b[n - k];
      EXPECT_EQ(c[n], acc) << "n=" << n;
    }
    ++checked;
  }
  EXPECT_GE(checked, 4);
}

TEST(Surd, EvaluateMatchesSeries) {
  for (int q : {3, 4, 5}) {
    SurdFunction f = cayley_Q_pair(q, 2);
    auto c = f.series(120);
    for (double x : {-0.45, -0.2, 0.1, 0.3, 0.49}) {
      auto direct = f.evaluate({x, 0.0}, Variable::Z);
      EXPECT_NEAR(std::abs(direct - sum_series(c, {x, 0.0})), 0.0, 1e-12);
    }
    std::complex<double> zc(0.2, 0.3);
    EXPECT_NEAR(std::abs(f.evaluate(zc, Variable::Z) - sum_series(c, zc)), 0.0, 1e-12);
  }
}

TEST(Surd, EvaluateSpecialPoints) {
  EXPECT_NEAR(std::abs(cayley_Q(7).evaluate(0.0, Variable::Z) - 1.0), 0.0, 1e-15);
  double qa = 4.0 / (2.0 * std::sqrt(3.0));
  EXPECT_NEAR(cayley_Q(4).evaluate({qa, 0.0}, Variable::Z).real(), 3.0, 1e-6);
  // P(1) = 1/(q-1) and the removable point z = 1 of Q.
  EXPECT_NEAR(cayley_P(5).evaluate(1.0, Variable::Z).real(), 0.25, 1e-14);
  EXPECT_NEAR(cayley_Q(5).evaluate(1.0, Variable::Z).real(), cayley_Q(5).evaluate(1.0 - 1e-7, Variable::Z).real(), 1e-5);
}

TEST(Surd, BranchConventions) {
  const int q = 4;
  double c = 2.0 * std::sqrt(3.0) / 4.0;
  for (double x : {-0.8, -0.3, 0.0, 0.5}) {
    double lam = x * c;
    auto above = r_lambda<double>(q, {lam, 0.0}, Side::Above);
    EXPECT_GT(above.imag(), 0.0);
    EXPECT_NEAR(above.imag(), std::sqrt(12.0 - 16.0 * lam * lam), 1e-12);
  }
  // ~ q lambda at +-infinity.
  EXPECT_NEAR(r_lambda<double>(q, {100.0, 0.0}, Side::Auto).real(), 400.0, 0.1);
  EXPECT_NEAR(r_lambda<double>(q, {-100.0, 0.0}, Side::Auto).real(), -400.0, 0.1);
  EXPECT_NEAR(std::abs(r_lambda<double>(q, {0.0, 100.0}, Side::Auto) - std::complex<double>(0, 400.0)), 0.0, 0.1);
  // Conjugation symmetry.
  SurdFunction f = cayley_Q_pair(q, 1);
  for (double lam : {-0.5, 0.1, 0.7}) {
    auto up = f.evaluate({lam, 0.0}, Variable::Lambda, Side::Above);
    auto down = f.evaluate({lam, 0.0}, Variable::Lambda, Side::Below);
    EXPECT_NEAR(std::abs(up - std::conj(down)), 0.0, 1e-12);
  }
  // Continuity of the boundary value from above.
  auto lim = f.evaluate({0.3, 0.0}, Variable::Lambda, Side::Above);
  auto near = f.evaluate({0.3, 1e-9}, Variable::Lambda, Side::Auto);
  EXPECT_NEAR(std::abs(lim - near), 0.0, 1e-6);
}

TEST(Surd, LambdaFormOfCayleyQ) {
  for (int q : {3, 4, 7}) {
    LambdaForm lf = cayley_Q(q).lambda_form();
    RationalFunction expectBt(Poly::constant(Rational(1, 2)), Poly{Rational(-1), Rational(0), Rational(1)});
    EXPECT_EQ(lf.Bt, expectBt);
    RationalFunction expectB(Poly{Rational(0), Rational(2 - q, 2)}, Poly{Rational(-1), Rational(0), Rational(1)});
    EXPECT_EQ(lf.B, expectB);
  }
}

TEST(Surd, DerivativeMatchesFiniteDifference) {
  SurdFunction f = cayley_Q_pair(5, 3);
  SurdFunction df = f.derivative();
  for (double x : {0.1, 0.4, -0.6}) {
    double h = 1e-6;
    double fd = (f.evaluate(x + h, Variable::Z).real() - f.evaluate(x - h, Variable::Z).real()) / (2 * h);
    EXPECT_NEAR(df.evaluate(x, Variable::Z).real(), fd, 1e-6);
  }
}

TEST(Residue, SimplePole) {
  // 1/(lambda - 2) as a lambda-form: lambda^-1 f(1/lambda) with f(z) = 1/(1 - 2z).
  SurdFunction f = SurdFunction::rational(3, RationalFunction(Poly::constant(1), Poly{Rational(1), Rational(-2)}));
  auto roots = real_roots(Poly{Rational(-2), Rational(1)}, Rational(0), Rational(3));
  ASSERT_EQ(roots.size(), 1u);
  EXPECT_DOUBLE_EQ(residue_at(f, roots[0], Variable::Lambda), 1.0);
}

TEST(Residue, NotAPoleAndHigherOrder) {
  SurdFunction f = SurdFunction::rational(3, RationalFunction(Poly{Rational(0), Rational(1)}, Poly{Rational(1), Rational(-2)}));
  auto other = real_roots(Poly{Rational(-3, 2), Rational(1)}, Rational(0), Rational(3));
  try {
    residue_at(f, other[0], Variable::Lambda);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "NotAPole");
  }
  // z / (1 - 2z)^2 in z: double pole at 1/2 in z, well inside |z| < q/a.
  SurdFunction g = SurdFunction::rational(3, RationalFunction(Poly{Rational(0), Rational(1)}, Poly{Rational(1), Rational(-2)}.pow(2)));
  auto r = real_roots(Poly{Rational(-1, 2), Rational(1)}, Rational(0), Rational(1));
  try {
    residue_at(g, r[0], Variable::Z);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "HigherOrderPole");
  }
}

TEST(Residue, SurdPoleInZ) {
  // f = s/(1 - 4z) at q = 3: residue in z at 1/4 is -s(1/4)/4.
  SurdFunction f(RationalFunction(), RationalFunction(Poly::constant(1), Poly{Rational(1), Rational(-4)}), 3);
  auto r = real_roots(Poly{Rational(-1, 4), Rational(1)}, Rational(0), Rational(1));
  double s = std::sqrt(9.0 - 8.0 / 16.0);
  EXPECT_NEAR(residue_at(f, r[0], Variable::Z), -s / 4.0, 1e-14);
}
