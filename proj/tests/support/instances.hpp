#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "actree/graph.hpp"

namespace actree::testsupport {

/// Deterministic random asymptotic Cayley tree: connected core of 1..max_core vertices,
/// q in {3,4,5}, one or two graft sites with 1..3 trees each.
inline AsymptoticTree random_instance(std::uint64_t seed, int max_core = 6) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = uni(1, max_core);
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back("v" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  for (int i = 1; i < n; ++i) {
    int j = uni(0, i - 1);
    edges.emplace_back(labels[j], labels[i]);
    has[i][j] = has[j][i] = true;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!has[i][j] && uni(0, 9) < 3) {
        edges.emplace_back(labels[i], labels[j]);
        has[i][j] = has[j][i] = true;
      }
  const int q = uni(3, 5);
  const int sites = n == 1 ? 1 : uni(1, 2);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  GraftSpec grafts;
  for (int k = 0; k < sites; ++k) grafts.push_back({labels[order[k]], uni(1, 3)});
  return build_tree(CoreGraph(labels, edges), grafts, q);
}

/// Random vertex inside a grafted tree at depth 1..max_depth.
inline VertexAddress random_tree_vertex(const AsymptoticTree& G, std::mt19937_64& rng, int max_depth = 3) {
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const auto& v0 = G.graft_vertices();
  int g = v0[uni(0, static_cast<int>(v0.size()) - 1)];
  VertexAddress a = VertexAddress::in(G.core().label(g), uni(1, G.graft_count(g)));
  int depth = uni(1, max_depth);
  for (int d = 1; d < depth; ++d) a.path.push_back(uni(0, G.q() - 2));
  return a;
}

/// Pairs with at least one tree address.
inline std::vector<std::pair<VertexAddress, VertexAddress>> random_tree_pairs(const AsymptoticTree& G,
                                                                              std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::vector<std::pair<VertexAddress, VertexAddress>> out;
  for (int k = 0; k < count; ++k) {
    VertexAddress a = random_tree_vertex(G, rng);
    VertexAddress b;
    switch (uni(0, 2)) {
      case 0: b = VertexAddress::core(G.core().label(uni(0, G.core_size() - 1))); break;
      case 1: b = random_tree_vertex(G, rng); break;
      default: {
        // Same tree as a, to exercise the common-ancestor case.
        b = a;
        b.path.resize(uni(0, static_cast<int>(a.path.size())));
        int extra = uni(0, 2);
        for (int e = 0; e < extra; ++e) b.path.push_back(uni(0, G.q() - 2));
      }
    }
    if (uni(0, 1)) std::swap(a, b);
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace actree::testsupport
