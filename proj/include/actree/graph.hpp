#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "actree/errors.hpp"
#include "actree/rational.hpp"

namespace actree {

/// Finite simple connected core graph with string labels.
class CoreGraph {
 public:
  CoreGraph() = default;
  CoreGraph(std::vector<std::string> labels, const std::vector<std::pair<std::string, std::string>>& edges)
      : labels_(std::move(labels)) {
    if (labels_.empty()) fail("EmptyCore", "core must have at least one vertex");
    for (size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i].empty()) fail("InvalidLabel", "empty vertex label");
      if (!index_.emplace(labels_[i], static_cast<int>(i)).second)
        fail("DuplicateVertex", "vertex '" + labels_[i] + "' listed twice");
    }
    adj_.resize(labels_.size());
    for (const auto& [a, b] : edges) {
      int i = index_of(a), j = index_of(b);
      if (i < 0 || j < 0) fail("UnknownVertex", "edge {" + a + "," + b + "} references an unknown vertex");
      if (i == j) fail("DuplicateEdge", "self-loop at '" + a + "'");
      auto e = std::minmax(i, j);
      if (!edges_.insert(e).second) fail("DuplicateEdge", "edge {" + a + "," + b + "} listed twice");
      adj_[i].push_back(j);
      adj_[j].push_back(i);
    }
    for (auto& nb : adj_) std::sort(nb.begin(), nb.end());
    compute_distances();
  }

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(int i) const { return labels_.at(i); }
  int index_of(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? -1 : it->second;
  }
  const std::set<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }
  bool adjacent(int i, int j) const { return edges_.count(std::minmax(i, j)) > 0; }
  int distance(int i, int j) const { return dist_[i][j]; }

 private:
  void compute_distances() {
    const int n = size();
    dist_.assign(n, std::vector<int>(n, -1));
    for (int s = 0; s < n; ++s) {
      std::deque<int> queue{s};
      dist_[s][s] = 0;
      while (!queue.empty()) {
        int x = queue.front();
        queue.pop_front();
        for (int y : adj_[x]) {
          if (dist_[s][y] < 0) {
            dist_[s][y] = dist_[s][x] + 1;
            queue.push_back(y);
          }
        }
      }
      for (int t = 0; t < n; ++t)
        if (dist_[s][t] < 0) fail("DisconnectedCore", "'" + labels_[t] + "' unreachable from '" + labels_[s] + "'");
    }
  }

  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> index_;
  std::set<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::vector<int>> dist_;
};

struct GraftEntry {
  std::string vertex;
  int count = 0;
};
using GraftSpec = std::vector<GraftEntry>;

/// Vertex of G: a core vertex, or a vertex inside planted tree `tree` (1-based) at
/// core vertex `label`, reached from the tree root by `path` (child digits < q-1).
struct VertexAddress {
  bool in_tree = false;
  std::string label;
  int tree = 0;
  std::vector<int> path;

  static VertexAddress core(std::string label) { return {false, std::move(label), 0, {}}; }
  static VertexAddress in(std::string label, int tree, std::vector<int> path = {}) {
    return {true, std::move(label), tree, std::move(path)};
  }

  /// Distance to the graft vertex (0 for core vertices).
  int depth() const { return in_tree ? static_cast<int>(path.size()) + 1 : 0; }

  std::string str() const {
    if (!in_tree) return "core:" + label;
    std::string out = "tree:" + label + "/" + std::to_string(tree) + "/";
    for (size_t i = 0; i < path.size(); ++i) {
      if (i) out += ".";
      out += std::to_string(path[i]);
    }
    return out;
  }

  static VertexAddress parse(const std::string& text) {
    auto bad = [&](const std::string& why) -> VertexAddress { fail("InvalidAddress", "'" + text + "': " + why); };
    if (text.rfind("core:", 0) == 0) {
      if (text.size() == 5) return bad("empty label");
      return core(text.substr(5));
    }
    if (text.rfind("tree:", 0) != 0) return bad("expected 'core:' or 'tree:' prefix");
    std::string rest = text.substr(5);
    auto s2 = rest.rfind('/');
    if (s2 == std::string::npos || s2 == 0) return bad("missing '/<index>/'");
    auto s1 = rest.rfind('/', s2 - 1);
    if (s1 == std::string::npos || s1 == 0) return bad("missing '/<index>/'");
    VertexAddress a;
    a.in_tree = true;
    a.label = rest.substr(0, s1);
    std::string idx = rest.substr(s1 + 1, s2 - s1 - 1);
    std::string path = rest.substr(s2 + 1);
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos || idx.size() > 6)
      return bad("tree index must be a positive integer");
    a.tree = std::stoi(idx);
    size_t pos = 0;
    while (pos < path.size()) {
      auto dot = path.find('.', pos);
      std::string part = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
      if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos || part.size() > 6)
        return bad("path entries must be non-negative integers separated by '.'");
      a.path.push_back(std::stoi(part));
      if (dot == std::string::npos) break;
      pos = dot + 1;
      if (pos == path.size()) return bad("trailing '.'");
    }
    return a;
  }

  friend bool operator==(const VertexAddress& a, const VertexAddress& b) {
    return a.in_tree == b.in_tree && a.label == b.label && a.tree == b.tree && a.path == b.path;
  }
  friend bool operator!=(const VertexAddress& a, const VertexAddress& b) { return !(a == b); }
  friend bool operator<(const VertexAddress& a, const VertexAddress& b) { return a.str() < b.str(); }
};

/// Finite core plus planted Cayley trees T'_q grafted at some core vertices.
class AsymptoticTree {
 public:
  AsymptoticTree() = default;

  int q() const { return q_; }
  const CoreGraph& core() const { return core_; }
  const GraftSpec& grafts() const { return grafts_; }
  int core_size() const { return core_.size(); }

  /// Number of trees grafted at core vertex i.
  int graft_count(int i) const { return p_[i]; }
  /// Degree of core vertex i in G.
  int sigma(int i) const { return core_.degree(i) + p_[i]; }
  /// Core indices of V_0 in graft-spec order.
  const std::vector<int>& graft_vertices() const { return v0_; }
  bool is_graft_vertex(int i) const { return p_[i] > 0; }

  /// Degree in G of any vertex.
  int sigma(const VertexAddress& a) const {
    validate(a);
    return a.in_tree ? q_ : sigma(core_.index_of(a.label));
  }

  void validate(const VertexAddress& a) const {
    int i = core_.index_of(a.label);
    if (i < 0) fail("InvalidAddress", "unknown core vertex '" + a.label + "'");
    if (!a.in_tree) return;
    if (a.tree < 1 || a.tree > p_[i])
      fail("InvalidAddress", "tree index " + std::to_string(a.tree) + " out of range at '" + a.label + "'");
    for (int c : a.path)
      if (c < 0 || c >= q_ - 1) fail("InvalidAddress", "child digit " + std::to_string(c) + " must be < q-1");
  }

  VertexAddress parse_address(const std::string& text) const {
    VertexAddress a = VertexAddress::parse(text);
    validate(a);
    return a;
  }

  /// Core vertex at which the address's tree is attached (the vertex itself for core addresses).
  int anchor(const VertexAddress& a) const { return core_.index_of(a.label); }

  friend AsymptoticTree build_tree(CoreGraph core, GraftSpec grafts, int q);

 private:
  CoreGraph core_;
  GraftSpec grafts_;
  int q_ = 0;
  std::vector<int> p_;
  std::vector<int> v0_;
};

inline AsymptoticTree build_tree(CoreGraph core, GraftSpec grafts, int q) {
  if (q < 2) fail("DegreeTooSmall", "q = " + std::to_string(q) + " (need q >= 2)");
  AsymptoticTree g;
  g.p_.assign(core.size(), 0);
  if (grafts.empty()) fail("InvalidGraftSpec", "at least one graft is required");
  for (const auto& e : grafts) {
    int i = core.index_of(e.vertex);
    if (i < 0) fail("UnknownGraftVertex", "graft vertex '" + e.vertex + "' is not in the core");
    if (e.count < 1) fail("InvalidGraftSpec", "graft count at '" + e.vertex + "' must be >= 1");
    if (g.p_[i] != 0) fail("InvalidGraftSpec", "graft vertex '" + e.vertex + "' listed twice");
    g.p_[i] = e.count;
    g.v0_.push_back(i);
  }
  g.core_ = std::move(core);
  g.grafts_ = std::move(grafts);
  g.q_ = q;
  return g;
}

/// d_G(u, v).
inline int distance(const AsymptoticTree& G, const VertexAddress& u, const VertexAddress& v) {
  G.validate(u);
  G.validate(v);
  const auto& core = G.core();
  int gu = core.index_of(u.label), gv = core.index_of(v.label);
  if (u.in_tree && v.in_tree && gu == gv && u.tree == v.tree) {
    size_t c = 0;
    while (c < u.path.size() && c < v.path.size() && u.path[c] == v.path[c]) ++c;
    return static_cast<int>(u.path.size() - c + v.path.size() - c);
  }
  return u.depth() + core.distance(gu, gv) + v.depth();
}

/// Neighbours of a vertex of G, in a fixed order.
inline std::vector<VertexAddress> neighbors(const AsymptoticTree& G, const VertexAddress& a) {
  std::vector<VertexAddress> out;
  const auto& core = G.core();
  int i = core.index_of(a.label);
  if (!a.in_tree) {
    for (int j : core.neighbors(i)) out.push_back(VertexAddress::core(core.label(j)));
    for (int t = 1; t <= G.graft_count(i); ++t) out.push_back(VertexAddress::in(a.label, t));
    return out;
  }
  if (a.path.empty()) {
    out.push_back(VertexAddress::core(a.label));
  } else {
    auto parent = a;
    parent.path.pop_back();
    out.push_back(parent);
  }
  for (int c = 0; c < G.q() - 1; ++c) {
    auto child = a;
    child.path.push_back(c);
    out.push_back(std::move(child));
  }
  return out;
}

/// Explicit ball B_R(center) of G.
struct TruncatedGraph {
  std::vector<VertexAddress> vertices;
  std::vector<int> dist;                  // distance from the center
  std::vector<std::vector<int>> adjacency;  // edges inside the ball
  std::vector<int> degree;                // degree in G
  std::vector<bool> boundary;             // dist == R

  int index_of(const VertexAddress& a) const {
    for (size_t i = 0; i < vertices.size(); ++i)
      if (vertices[i] == a) return static_cast<int>(i);
    return -1;
  }
};

inline TruncatedGraph truncated_ball(const AsymptoticTree& G, const VertexAddress& center, int R) {
  G.validate(center);
  if (R < 0) fail("InvalidRadius", "R must be >= 0");
  TruncatedGraph T;
  std::map<std::string, int> index;
  auto add = [&](const VertexAddress& a, int d) {
    index.emplace(a.str(), static_cast<int>(T.vertices.size()));
    T.vertices.push_back(a);
    T.dist.push_back(d);
    T.degree.push_back(G.sigma(a));
    T.boundary.push_back(d == R);
  };
  add(center, 0);
  for (size_t k = 0; k < T.vertices.size(); ++k) {
    if (T.dist[k] == R) continue;
    for (const auto& nb : neighbors(G, T.vertices[k]))
      if (!index.count(nb.str())) add(nb, T.dist[k] + 1);
  }
  T.adjacency.resize(T.vertices.size());
  for (size_t k = 0; k < T.vertices.size(); ++k) {
    for (const auto& nb : neighbors(G, T.vertices[k])) {
      auto it = index.find(nb.str());
      if (it != index.end()) T.adjacency[k].push_back(it->second);
    }
    std::sort(T.adjacency[k].begin(), T.adjacency[k].end());
  }
  return T;
}

enum class DegreeConvention { InG, Standalone };

/// K restricted to the core: entry (u, v) = 1/sigma_v for core edges. A single isolated
/// vertex gives the 1x1 zero matrix, consistent with Q^B = 1.
inline std::vector<std::vector<Rational>> core_transition_matrix(const AsymptoticTree& G,
                                                                 DegreeConvention conv = DegreeConvention::InG) {
  const auto& core = G.core();
  const int n = core.size();
  std::vector<std::vector<Rational>> K(n, std::vector<Rational>(n));
  for (const auto& [i, j] : core.edges()) {
    int si = conv == DegreeConvention::InG ? G.sigma(i) : core.degree(i);
    int sj = conv == DegreeConvention::InG ? G.sigma(j) : core.degree(j);
    K[i][j] = Rational(1, sj);
    K[j][i] = Rational(1, si);
  }
  return K;
}

}  // namespace actree
