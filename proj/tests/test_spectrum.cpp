#include <gtest/gtest.h>

#include <numbers>

#include "actree/spectrum.hpp"
#include "support/instances.hpp"

using namespace actree;

namespace {

AsymptoticTree spec(const std::string& name) { return load_graph_spec(std::string(ACTREE_SAMPLES_DIR) + "/" + name); }

VertexAddress core(const std::string& l) { return VertexAddress::core(l); }

}  // namespace

TEST(Linalg, CharacteristicPolynomialAndNullspace) {
  RationalMatrix M{{Rational(0), Rational(1)}, {Rational(1), Rational(0)}};
  EXPECT_EQ(characteristic_polynomial(M), (Poly{Rational(-1), Rational(0), Rational(1)}));
  RationalMatrix A{{Rational(1), Rational(1), Rational(0)}, {Rational(0), Rational(0), Rational(1)}};
  auto ns = nullspace(A, 3);
  ASSERT_EQ(ns.size(), 1u);
  EXPECT_EQ(ns[0][0], -1);
  EXPECT_EQ(ns[0][1], 1);
  EXPECT_EQ(ns[0][2], 0);
  // Complete graph K_4: eigenvalues 1 and -1/3 (three times).
  auto roots = core_eigenvalues(spec("k4_q10.json"));
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_EQ(roots[0].lo, Rational(-1, 3));
  EXPECT_EQ(roots[0].multiplicity, 3);
  EXPECT_EQ(roots[1].lo, 1);
}

TEST(Exterior, CompleteCoreQ10) {
  auto G = spec("k4_q10.json");
  GeneratingBundle b(G);
  auto rep = compute_spectrum(b);
  ASSERT_EQ(rep.pure_point.size(), 1u);
  const auto& r = rep.pure_point[0];
  ASSERT_TRUE(r.exact_value());
  EXPECT_EQ(*r.exact_value(), Rational(41, 52));
  EXPECT_EQ(r.multiplicity, 1);
  EXPECT_EQ(r.location, Location::Exterior);
  auto pred = complete_core_predictions(4, 1, 10);
  EXPECT_EQ(pred.discriminant, -316);
  ASSERT_EQ(pred.modes.size(), 1u);
  EXPECT_EQ(*pred.modes[0].exact_lambda, Rational(41, 52));
  EXPECT_EQ(*pred.modes[0].exact_xi_inv, Rational(2, 13));
  EXPECT_TRUE(pred.cg4);
  // Constant core mode: each vertex carries 1/4 of the projection.
  for (int u = 0; u < 4; ++u) EXPECT_GT(r.residues[u][u], 0);
  EXPECT_NEAR(r.residues[0][1].convert_to<double>(), r.residues[0][0].convert_to<double>(), 1e-15);
}

TEST(Exterior, CompleteCoreQ49DegenerateMode) {
  auto G = spec("k4_q49.json");
  GeneratingBundle b(G);
  auto rep = compute_spectrum(b);
  auto pred = complete_core_predictions(4, 1, 49);
  ASSERT_EQ(rep.pure_point.size(), 2u);
  ASSERT_EQ(pred.modes.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(rep.pure_point[k].value, pred.modes[k].lambda, 1e-10);
    EXPECT_EQ(rep.pure_point[k].multiplicity, pred.modes[k].multiplicity);
  }
  EXPECT_NEAR(rep.pure_point[0].value, -0.28354, 1e-5);
  EXPECT_GT(std::abs(rep.pure_point[0].value) - rep.band_edge(), 7e-4);
  EXPECT_EQ(pred.modes[0].mode, "degenerate");
  EXPECT_EQ(pred.modes[0].multiplicity, 3);
  EXPECT_EQ(pred.discriminant, 113);
  EXPECT_TRUE(pred.uniform);
  auto v = verify_point_bounds(rep, G);
  EXPECT_TRUE(v.ok()) << v.str();
  EXPECT_EQ(v.total, 4);
}

TEST(Exterior, QRegularFamily) {
  auto G = spec("k5_q5.json");
  auto rep = compute_spectrum(GeneratingBundle(G));
  bool found = false;
  for (const auto& r : rep.pure_point)
    if (r.exact_value() && *r.exact_value() == Rational(13, 15)) found = true;
  EXPECT_TRUE(found);
  auto pr = qregular_predictions(G);
  ASSERT_FALSE(pr.empty_certified);
  ASSERT_EQ(pr.pairs.size(), 1u);
  EXPECT_EQ(*pr.pairs[0].exact_lambda_prime, Rational(13, 15));
  EXPECT_NEAR(pr.pairs[0].back_substituted, 1.0, 1e-12);
  ASSERT_EQ(rep.pure_point.size(), pr.pairs.size());
  EXPECT_NEAR(rep.pure_point[0].value, pr.pairs[0].lambda_prime, 1e-10);
}

TEST(Exterior, CycleIsEmpty) {
  auto G = spec("cycle6_q4.json");
  auto rep = compute_spectrum(GeneratingBundle(G));
  EXPECT_TRUE(rep.pure_point.empty());
  auto pr = qregular_predictions(G);
  EXPECT_TRUE(pr.empty_certified);
  EXPECT_TRUE(pr.pairs.empty());
  EXPECT_THROW(qregular_predictions(spec("p3_trap.json")), Error);
}

TEST(Exterior, PureTreeIsEmpty) {
  auto rep = compute_spectrum(GeneratingBundle(spec("cayley_t4.json")));
  EXPECT_TRUE(rep.pure_point.empty());
  auto v = verify_point_bounds(rep, spec("cayley_t4.json"));
  EXPECT_TRUE(v.ok());
  EXPECT_EQ(v.core_exterior, 0);
  EXPECT_EQ(v.core_size, 1);
  EXPECT_THROW(exterior_eigenvalues(GeneratingBundle(spec("chain.json"))), Error);
}

TEST(Embedded, P3Trap) {
  auto G = spec("p3_trap.json");
  auto sp = embedded_eigenvalues(G);
  ASSERT_EQ(sp.size(), 1u);
  EXPECT_TRUE(sp[0].root.exact);
  EXPECT_EQ(sp[0].root.lo, 0);
  EXPECT_EQ(sp[0].dimension, 1);
  ASSERT_TRUE(sp[0].exact_basis);
  const auto& phi = (*sp[0].exact_basis)[0];
  EXPECT_EQ(phi[1], 0);
  EXPECT_EQ(phi[0], -phi[2]);
  auto rep = compute_spectrum(GeneratingBundle(G));
  ASSERT_EQ(rep.pure_point.size(), 1u);
  const auto& r = rep.pure_point[0];
  EXPECT_EQ(r.location, Location::Embedded);
  EXPECT_EQ(r.origin, Origin::CoreConstrained);
  ASSERT_TRUE(r.exact_residues);
  EXPECT_EQ((*r.exact_residues)[0][0], Rational(1, 2));
  EXPECT_EQ((*r.exact_residues)[0][2], Rational(-1, 2));
  EXPECT_EQ((*r.exact_residues)[1][1], 0);
  EXPECT_EQ(point_residue<double>(G, r, VertexAddress::in("v", 1), VertexAddress::in("v", 1)), 0.0);
}

TEST(Embedded, NoneWhenEveryVertexIsGrafted) {
  EXPECT_TRUE(embedded_eigenvalues(spec("k4_q10.json")).empty());
  EXPECT_TRUE(embedded_eigenvalues(spec("k5_q5.json")).empty());
}

TEST(Completeness, PointPlusContinuousIsOne) {
  for (const char* name : {"k4_q10.json", "k4_q49.json", "k5_q5.json", "cycle6_q4.json", "p3_trap.json"}) {
    auto G = spec(name);
    GeneratingBundle b(G);
    auto rep = compute_spectrum(b);
    for (const auto& l : G.core().labels()) {
      auto c = completeness(rep, b, core(l));
      EXPECT_NEAR(c.total(), 1.0, 1e-8) << name << " " << l;
    }
    for (int g : G.graft_vertices()) {
      auto x = VertexAddress::in(G.core().label(g), 1, {0});
      EXPECT_NEAR(completeness(rep, b, x).total(), 1.0, 1e-8) << name << " tree";
    }
  }
}

TEST(Density, PureTree) {
  for (int q : {3, 4, 5}) {
    auto G = build_tree(CoreGraph({"o"}, {}), {{"o", q}}, q);
    GeneratingBundle b(G);
    const double c = a_value<double>(q) / q;
    for (double lam : {-0.9 * c, -0.3 * c, 0.1 * c, 0.7 * c}) {
      double expect = std::sqrt(4.0 * (q - 1) - q * q * lam * lam) / (2 * std::numbers::pi * (1 - lam * lam));
      EXPECT_NEAR(density(b, core("o"), core("o"), lam), expect, 1e-13);
      auto nb = VertexAddress::in("o", 1);
      EXPECT_NEAR(density(b, core("o"), nb, lam) / density(b, core("o"), core("o"), lam), lam, 1e-13);
    }
    EXPECT_NEAR(density(b, core("o"), core("o"), c), 0.0, 1e-15);
    EXPECT_NEAR(density(b, core("o"), core("o"), -c), 0.0, 1e-15);
    EXPECT_THROW(density(b, core("o"), core("o"), c + 1e-3), Error);
  }
}

TEST(Density, ChebyshevIdentity) {
  for (int q : {3, 4, 5}) {
    auto G = build_tree(CoreGraph({"o"}, {}), {{"o", q}}, q);
    GeneratingBundle b(G);
    PairDensity diag(b, core("o"), core("o"));
    for (int l = 0; l <= 3; ++l) {
      VertexAddress v = l == 0 ? core("o") : VertexAddress::in("o", 1, std::vector<int>(l - 1, 0));
      PairDensity pair(b, core("o"), v);
      for (int k = 0; k <= 100; ++k) {
        double th = std::numbers::pi * k / 100;
        EXPECT_NEAR(pair.reduced(th) / diag.reduced(th), cayley_pair_density(q, l, th), 1e-8);
      }
    }
  }
  EXPECT_DOUBLE_EQ(cayley_pair_density(4, 0, 0.3), 1.0);
  EXPECT_NEAR(cayley_pair_density(4, 1, 0.3), std::sqrt(3.0) / 2 * std::cos(0.3), 1e-15);
}

TEST(Density, NonNegativeDiagonal) {
  for (const char* name : {"k4_q49.json", "p3_trap.json", "k2_q3.json"}) {
    auto G = spec(name);
    GeneratingBundle b(G);
    for (const auto& l : G.core().labels()) {
      PairDensity d(b, core(l), core(l));
      for (int k = 1; k < 200; ++k) EXPECT_GE(d.at_theta(std::numbers::pi * k / 200), -1e-14) << name;
    }
  }
}

TEST(Eigenfunction, ConstantModeExtension) {
  auto G = spec("k4_q10.json");
  auto rep = compute_spectrum(GeneratingBundle(G));
  auto phis = core_eigenfunctions(rep.pure_point[0], rep.sigma);
  ASSERT_EQ(phis.size(), 1u);
  auto e = eigenfunction_extension(G, rep.pure_point[0].value, phis[0]);
  EXPECT_NEAR(e.xi_inv, 2.0 / 13, 1e-15);
  EXPECT_TRUE(e.square_summable);
  EXPECT_NEAR(9 * e.xi_inv * e.xi_inv, 36.0 / 169, 1e-15);
  EXPECT_LT(e.residual(core("a"), 6), 1e-10);
  EXPECT_THROW(eigenfunction_extension(G, 0.1, phis[0]), Error);
}

TEST(Eigenfunction, DegenerateModesQ49) {
  auto G = spec("k4_q49.json");
  auto rep = compute_spectrum(GeneratingBundle(G));
  auto phis = core_eigenfunctions(rep.pure_point[0], rep.sigma);
  ASSERT_EQ(phis.size(), 3u);
  for (const auto& phi : phis) {
    auto e = eigenfunction_extension(G, rep.pure_point[0].value, phi);
    EXPECT_TRUE(e.square_summable);
    EXPECT_LT(e.residual(core("b"), 3), 1e-10);
  }
}

TEST(Bounds, RandomizedInstances) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto G = testsupport::random_instance(seed);
    GeneratingBundle b(G);
    auto rep = compute_spectrum(b);
    auto v = verify_point_bounds(rep, G);
    EXPECT_TRUE(v.ok()) << "seed " << seed << ": " << v.str();
    for (const auto& r : rep.pure_point) {
      if (r.location == Location::Exterior) {
        EXPECT_LE(r.multiplicity, static_cast<int>(G.graft_vertices().size()) + r.multiplicity);
        EXPECT_GT(std::abs(r.value), rep.band_edge());
      } else {
        EXPECT_LE(std::abs(r.value), rep.band_edge());
      }
    }
    auto rc = multiplicity_recursion_check(b);
    EXPECT_TRUE(rc.ok) << "seed " << seed << ": " << (rc.mismatches.empty() ? "" : rc.mismatches[0]);
  }
}

TEST(Bounds, StageZeroMatchesCoreSpectrum) {
  auto G = spec("k4_q49.json");
  GeneratingBundle b(G);
  int m = 0;
  for (const auto& r : stage_exterior(b, 0)) m += r.multiplicity;
  EXPECT_EQ(m, core_exterior_multiplicity(G));
  EXPECT_EQ(m, 4);
}

TEST(Interlacing, PureTreeStage) {
  auto rep = interlacing_check(SurdFunction::constant(5, 1), 0, 5, 5);
  EXPECT_TRUE(rep.z.empty());
  EXPECT_TRUE(rep.w.empty());
  EXPECT_LE(rep.z_star.size(), 1u);
  EXPECT_LE(rep.w_star.size(), 1u);
  EXPECT_TRUE(rep.ok());
}

TEST(Interlacing, K2MatchesSignScan) {
  const int q = 10, p = 1;
  auto G = build_tree(CoreGraph({"a", "b"}, {{"a", "b"}}), {{"a", p}}, q);
  GeneratingBundle b(G);
  SurdFunction QB = b.stage_Q(0, 0, 0);
  auto rep = interlacing_check(QB, 1, p, q);
  EXPECT_TRUE(rep.ok());
  // Zeros of h = p Q^B + sigma Q, with the sign flips at the poles of Q^B divided out.
  SurdFunction h = Rational(p) * QB + cayley_Q(q);
  std::vector<double> old = rep.w;
  old.insert(old.end(), rep.z.begin(), rep.z.end());
  const double edge = q / a_value<double>(q);
  auto f = [&](double z) {
    double v = h.evaluate(z, Variable::Z).real();
    for (double x : old) v *= (z - x);
    return v;
  };
  int changes = 0;
  const int N = 10000;
  double prev = f(-edge * (1 - 0.5 / N));
  for (int k = 1; k < N; ++k) {
    double cur = f(-edge + 2 * edge * (k + 0.5) / N);
    if ((cur > 0) != (prev > 0)) ++changes;
    prev = cur;
  }
  EXPECT_EQ(changes, static_cast<int>(rep.z_star.size() + rep.w_star.size()));
}

TEST(Interlacing, AlongRandomSequences) {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    GeneratingBundle b(testsupport::random_instance(seed, 5));
    for (int i = 0; i < static_cast<int>(b.sequence().size()); ++i) {
      int v0 = b.sequence()[i];
      auto rep = interlacing_check(b.stage_Q(i, v0, v0), b.stage_degrees(i)[v0], b.tree().graft_count(v0), b.q());
      EXPECT_TRUE(rep.ok()) << "seed " << seed << " stage " << i;
    }
  }
}

TEST(Report, Json) {
  auto rep = compute_spectrum(GeneratingBundle(spec("k4_q10.json")));
  auto j = spectrum_to_json(rep);
  EXPECT_EQ(j["band"]["upper"], "3/5");
  EXPECT_EQ(j["pure_point"][0]["exact"], "41/52");
  EXPECT_EQ(j["pure_point"][0]["multiplicity"], 1);
  auto j2 = spectrum_to_json(compute_spectrum(GeneratingBundle(spec("cycle6_q4.json"))));
  EXPECT_TRUE(j2["pure_point"].empty());
  EXPECT_EQ(j2["band"]["upper"], "sqrt(12)/4");
}
