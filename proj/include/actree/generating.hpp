#pragma once

#include <map>
#include <string>
#include <vector>

#include "actree/graph.hpp"
#include "actree/surd.hpp"

namespace actree {

/// First-return generating function of T_q: P(z) = (q - s)/(2(q-1)).
inline SurdFunction cayley_P(int q) {
  if (q < 2) fail("DegreeTooSmall", "q must be >= 2");
  Rational c(1, 2 * (q - 1));
  return SurdFunction(RationalFunction::constant(Rational(q) * c), RationalFunction::constant(-c), q);
}

/// All-returns generating function of T_q: Q(z) = (2 - q + s)/(2(1 - z^2)).
inline SurdFunction cayley_Q(int q) {
  if (q < 2) fail("DegreeTooSmall", "q must be >= 2");
  Poly den{Rational(2), Rational(0), Rational(-2)};
  return SurdFunction(RationalFunction(Poly::constant(Rational(2 - q)), den),
                      RationalFunction(Poly::constant(Rational(1)), den), q);
}

/// z^-1 P(z), the per-step factor along a geodesic in a tree.
inline SurdFunction cayley_step(int q) {
  if (q < 2) fail("DegreeTooSmall", "q must be >= 2");
  Poly den{Rational(0), Rational(2 * (q - 1))};
  return SurdFunction(RationalFunction(Poly::constant(Rational(q)), den),
                      RationalFunction(Poly::constant(Rational(-1)), den), q);
}

/// Q(z) (z^-1 P(z))^l: generating function between two vertices at distance l in T_q.
inline SurdFunction cayley_Q_pair(int q, int l) {
  if (l < 0) fail("InconsistentDistances", "distance must be >= 0");
  return cayley_Q(q) * cayley_step(q).pow(l);
}

/// Q at the graft vertex after grafting p trees there.
inline SurdFunction graft_Q_v0(const SurdFunction& QB_v0, int sigma, int p, int q) {
  SurdFunction Q = cayley_Q(q);
  SurdFunction denom = Rational(sigma) * Q + Rational(p) * QB_v0;
  return Rational(sigma + p) * QB_v0 * Q / denom;
}

/// Core pair (u, v), v != v0.
inline SurdFunction graft_Q_core_pair(const SurdFunction& QB_uv, const SurdFunction& QB_uv0,
                                      const SurdFunction& QB_v0v, const SurdFunction& QB_v0, int sigma, int p,
                                      int q) {
  if (p == 0) return QB_uv;
  SurdFunction denom = Rational(sigma) * cayley_Q(q) + Rational(p) * QB_v0;
  return QB_uv - Rational(p) * QB_uv0 * QB_v0v / denom;
}

/// From core vertex u to a tree vertex at the given depth below v0.
inline SurdFunction graft_Q_core_tree(const SurdFunction& QB_uv0, const SurdFunction& QB_v0, int sigma, int p,
                                      int q, int depth) {
  if (depth < 1) fail("InconsistentDistances", "tree depth must be >= 1");
  SurdFunction Q = cayley_Q(q);
  SurdFunction denom = Rational(sigma) * Q + Rational(p) * QB_v0;
  return Rational(q) * Q * QB_uv0 / denom * cayley_step(q).pow(depth);
}

/// alpha_p = 1 - q QB_v0 / (sigma Q + p QB_v0).
inline SurdFunction alpha_p(const SurdFunction& QB_v0, int sigma, int p, int q) {
  SurdFunction denom = Rational(sigma) * cayley_Q(q) + Rational(p) * QB_v0;
  return SurdFunction::constant(q, 1) - Rational(q) * QB_v0 / denom;
}

/// Two vertices of the same grafted tree at depths d_u, d_v and distance d_uv.
inline SurdFunction graft_Q_tree_tree(const SurdFunction& QB_v0, int sigma, int p, int q, int d_u, int d_v,
                                      int d_uv) {
  int through = d_u + d_v - d_uv;
  if (d_u < 1 || d_v < 1 || d_uv < 0 || through < 0 || through % 2 != 0 || d_uv < std::abs(d_u - d_v))
    fail("InconsistentDistances", "depths " + std::to_string(d_u) + ", " + std::to_string(d_v) +
                                      " incompatible with distance " + std::to_string(d_uv));
  SurdFunction step = cayley_step(q);
  SurdFunction one = SurdFunction::constant(q, 1);
  return cayley_Q(q) * (one - alpha_p(QB_v0, sigma, p, q) * step.pow(through)) * step.pow(d_uv);
}

/// Sum of coefficient * (z^-1 P)^power: a generating function kept in factored form so
/// that deep tree vertices never require expanding large powers.
struct GreenKernel {
  struct Term {
    SurdFunction coeff;
    int power = 0;
  };
  int q = 3;
  std::vector<Term> terms;

  int min_power() const {
    int m = terms.empty() ? 0 : terms.front().power;
    for (const auto& t : terms) m = std::min(m, t.power);
    return m;
  }
  int max_power() const {
    int m = 0;
    for (const auto& t : terms) m = std::max(m, t.power);
    return m;
  }

  SurdFunction expand() const {
    SurdFunction out(q);
    SurdFunction step = cayley_step(q);
    for (const auto& t : terms) out = out + t.coeff * step.pow(t.power);
    return out;
  }
};

/// Exact generating functions of an asymptotic Cayley tree, built along a G-sequence.
class GeneratingBundle {
 public:
  explicit GeneratingBundle(AsymptoticTree G, std::vector<int> sequence = {})
      : G_(std::move(G)), Q_(cayley_Q(G_.q())), step_(cayley_step(G_.q())) {
    if (sequence.empty()) sequence = G_.graft_vertices();
    std::vector<int> sorted_seq = sequence, v0 = G_.graft_vertices();
    std::sort(sorted_seq.begin(), sorted_seq.end());
    std::sort(v0.begin(), v0.end());
    if (sorted_seq != v0) fail("InvalidSequence", "G-sequence must list every graft vertex exactly once");
    sequence_ = sequence;
    build();
  }

  const AsymptoticTree& tree() const { return G_; }
  int q() const { return G_.q(); }
  const std::vector<int>& sequence() const { return sequence_; }
  int stage_count() const { return static_cast<int>(stages_.size()); }

  /// Q^{G^(i)}_{u,v} for core indices, stage 0 being the bare core.
  const SurdFunction& stage_Q(int stage, int u, int v) const { return stages_.at(stage)[u][v]; }
  const std::vector<int>& stage_degrees(int stage) const { return degrees_.at(stage); }

  const SurdFunction& core_Q(int u, int v) const { return stages_.back()[u][v]; }

  GreenKernel kernel(const VertexAddress& u, const VertexAddress& v) const {
    G_.validate(u);
    G_.validate(v);
    const int q = G_.q();
    const auto& core = G_.core();
    int gu = core.index_of(u.label), gv = core.index_of(v.label);
    GreenKernel K;
    K.q = q;
    auto bridge = [&](int g) { return Rational(q, G_.sigma(g)); };
    if (!u.in_tree && !v.in_tree) {
      K.terms.push_back({core_Q(gu, gv), 0});
    } else if (!u.in_tree) {
      K.terms.push_back({bridge(gv) * core_Q(gu, gv), v.depth()});
    } else if (!v.in_tree) {
      K.terms.push_back({core_Q(gu, gv), u.depth()});
    } else if (gu == gv && u.tree == v.tree) {
      int duv = distance(G_, u, v);
      int through = u.depth() + v.depth();
      K.terms.push_back({Q_, duv});
      K.terms.push_back({bridge(gu) * core_Q(gu, gu) - Q_, through});
    } else {
      K.terms.push_back({bridge(gv) * core_Q(gu, gv), u.depth() + v.depth()});
    }
    return K;
  }

  SurdFunction assemble(const VertexAddress& u, const VertexAddress& v) const { return kernel(u, v).expand(); }

 private:
  void build() {
    const auto& core = G_.core();
    const int n = core.size();
    const int q = G_.q();
    std::vector<int> deg(n);
    for (int i = 0; i < n; ++i) deg[i] = core.degree(i);

    // Stage 0: (I - zK)^-1 over Q(z) with core degrees; Q_{u,v} = M^-1[v][u].
    std::vector<std::vector<RationalFunction>> M(n, std::vector<RationalFunction>(n)), inv(n, std::vector<RationalFunction>(n));
    for (int i = 0; i < n; ++i) {
      M[i][i] = RationalFunction::constant(1);
      inv[i][i] = RationalFunction::constant(1);
    }
    for (const auto& [i, j] : core.edges()) {
      M[i][j] = RationalFunction(Poly{Rational(0), Rational(-1, deg[j])});
      M[j][i] = RationalFunction(Poly{Rational(0), Rational(-1, deg[i])});
    }
    for (int c = 0; c < n; ++c) {
      int piv = c;
      while (piv < n && M[piv][c].is_zero()) ++piv;
      if (piv == n) fail("IntegrityFailure", "singular I - zK");
      std::swap(M[piv], M[c]);
      std::swap(inv[piv], inv[c]);
      RationalFunction ip = M[c][c].inverse();
      for (int k = 0; k < n; ++k) {
        M[c][k] = M[c][k] * ip;
        inv[c][k] = inv[c][k] * ip;
      }
      for (int r = 0; r < n; ++r) {
        if (r == c || M[r][c].is_zero()) continue;
        RationalFunction f = M[r][c];
        for (int k = 0; k < n; ++k) {
          if (!M[c][k].is_zero()) M[r][k] = M[r][k] - f * M[c][k];
          if (!inv[c][k].is_zero()) inv[r][k] = inv[r][k] - f * inv[c][k];
        }
      }
    }
    std::vector<std::vector<SurdFunction>> cur(n, std::vector<SurdFunction>(n, SurdFunction(q)));
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) cur[u][v] = SurdFunction::rational(q, inv[v][u]);
    stages_.push_back(cur);
    degrees_.push_back(deg);

    for (int v0 : sequence_) {
      const int p = G_.graft_count(v0);
      const int sigma = deg[v0];
      SurdFunction inv_denom = (Rational(sigma) * Q_ + Rational(p) * cur[v0][v0]).inverse();
      std::vector<std::vector<SurdFunction>> nxt(n, std::vector<SurdFunction>(n, SurdFunction(q)));
      for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
          if (v != v0) nxt[u][v] = cur[u][v] - Rational(p) * cur[u][v0] * cur[v0][v] * inv_denom;
      nxt[v0][v0] = Rational(sigma + p) * cur[v0][v0] * Q_ * inv_denom;
      deg[v0] += p;
      // Remaining column from sigma_u Q_{u,v0} = sigma_v0 Q_{v0,u}.
      for (int u = 0; u < n; ++u)
        if (u != v0) nxt[u][v0] = Rational(deg[v0], deg[u]) * nxt[v0][u];
      cur = std::move(nxt);
      stages_.push_back(cur);
      degrees_.push_back(deg);
    }
  }

  AsymptoticTree G_;
  SurdFunction Q_, step_;
  std::vector<int> sequence_;
  std::vector<std::vector<std::vector<SurdFunction>>> stages_;
  std::vector<std::vector<int>> degrees_;
};

inline SurdFunction assemble_Q(const GeneratingBundle& bundle, const VertexAddress& u, const VertexAddress& v) {
  return bundle.assemble(u, v);
}

/// P^G_u = 1 - 1/Q^G_u.
inline SurdFunction first_return_P(const GeneratingBundle& bundle, const VertexAddress& u) {
  return SurdFunction::constant(bundle.q(), 1) - bundle.assemble(u, u).inverse();
}

/// Exact p_n(u, v) for n = 0..N by propagating the walk distribution on the ball of
/// radius N around u. Vertices off the u/v tree paths are lumped by depth: all of them
/// at a given depth below one explicit vertex carry equal mass, which is exact for a
/// walk started at an explicit vertex.
inline std::vector<Rational> classical_pn_series(const AsymptoticTree& G, const VertexAddress& u,
                                                 const VertexAddress& v, int N) {
  G.validate(u);
  G.validate(v);
  const auto& core = G.core();
  const int q = G.q();
  std::vector<VertexAddress> expl;
  std::map<std::string, int> index;
  auto add = [&](const VertexAddress& a) {
    if (index.emplace(a.str(), static_cast<int>(expl.size())).second) expl.push_back(a);
  };
  for (int i = 0; i < core.size(); ++i) add(VertexAddress::core(core.label(i)));
  for (const auto* a : {&u, &v}) {
    if (!a->in_tree) continue;
    VertexAddress x = VertexAddress::in(a->label, a->tree);
    add(x);
    for (int c : a->path) {
      x.path.push_back(c);
      add(x);
    }
  }
  const int E = static_cast<int>(expl.size());
  // Neighbour lists among explicit vertices plus a lumped chain for the rest.
  std::vector<std::vector<int>> nb(E);
  std::vector<int> chain_mult(E, 0), sigma(E);
  for (int k = 0; k < E; ++k) {
    sigma[k] = G.sigma(expl[k]);
    int implicit = 0;
    for (const auto& y : neighbors(G, expl[k])) {
      auto it = index.find(y.str());
      if (it != index.end()) {
        nb[k].push_back(it->second);
      } else {
        // Implicit neighbours are always children (a root or a tree child).
        ++implicit;
      }
    }
    chain_mult[k] = implicit;
  }
  const int L = std::max(N, 1);
  // State: explicit masses, then for each explicit vertex L chain levels.
  std::vector<Rational> f(E + E * L), g(E + E * L);
  f[index.at(u.str())] = 1;
  const int target = index.at(v.str());
  std::vector<Rational> out;
  out.reserve(N + 1);
  const Rational down(q - 1, q), up(1, q);
  for (int n = 0; n <= N; ++n) {
    out.push_back(f[target]);
    if (n == N) break;
    std::fill(g.begin(), g.end(), Rational(0));
    for (int k = 0; k < E; ++k) {
      if (f[k] == 0) continue;
      Rational share = f[k] / sigma[k];
      for (int y : nb[k]) g[y] += share;
      if (chain_mult[k]) g[E + k * L] += share * chain_mult[k];
    }
    for (int k = 0; k < E; ++k) {
      if (!chain_mult[k]) continue;
      for (int h = 0; h < L; ++h) {
        const Rational& m = f[E + k * L + h];
        if (m == 0) continue;
        if (h == 0) g[k] += m * up; else g[E + k * L + h - 1] += m * up;
        if (h + 1 < L) g[E + k * L + h + 1] += m * down;
      }
    }
    std::swap(f, g);
  }
  return out;
}

inline Rational classical_pn_oracle(const AsymptoticTree& G, const VertexAddress& u, const VertexAddress& v, int n) {
  if (n < 0) fail("InvalidOrder", "n must be >= 0");
  return classical_pn_series(G, u, v, n).back();
}

/// Reference p_n on the explicit (unlumped) ball; exponential in n, for small checks.
inline std::vector<Rational> explicit_ball_pn_series(const AsymptoticTree& G, const VertexAddress& u,
                                                     const VertexAddress& v, int N) {
  TruncatedGraph T = truncated_ball(G, u, N);
  int target = T.index_of(v);
  std::vector<Rational> f(T.vertices.size()), g(T.vertices.size()), out;
  f[0] = 1;
  for (int n = 0; n <= N; ++n) {
    out.push_back(target >= 0 ? f[target] : Rational(0));
    if (n == N) break;
    std::fill(g.begin(), g.end(), Rational(0));
    for (size_t k = 0; k < f.size(); ++k) {
      if (f[k] == 0) continue;
      Rational share = f[k] / T.degree[k];
      for (int y : T.adjacency[k]) g[y] += share;
    }
    std::swap(f, g);
  }
  return out;
}

}  // namespace actree
