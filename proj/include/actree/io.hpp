#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "actree/graph.hpp"
#include "actree/surd.hpp"

namespace actree {

using json = nlohmann::ordered_json;

inline AsymptoticTree graph_from_json(const json& j) {
  auto need = [&](const json& obj, const char* key) -> const json& {
    if (!obj.is_object() || !obj.contains(key)) fail("MalformedSpec", std::string("missing field '") + key + "'");
    return obj.at(key);
  };
  try {
    const json& jq = need(j, "q");
    if (!jq.is_number_integer()) fail("MalformedSpec", "'q' must be an integer");
    const json& core = need(j, "core");
    std::vector<std::string> labels;
    for (const auto& v : need(core, "vertices")) {
      if (!v.is_string()) fail("MalformedSpec", "vertex labels must be strings");
      labels.push_back(v.get<std::string>());
    }
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& e : need(core, "edges")) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
        fail("MalformedSpec", "edges must be pairs of labels");
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    GraftSpec grafts;
    for (const auto& g : need(j, "grafts")) {
      const json& v = need(g, "vertex");
      const json& c = need(g, "count");
      if (!v.is_string() || !c.is_number_integer()) fail("MalformedSpec", "graft entries need string vertex and integer count");
      grafts.push_back({v.get<std::string>(), c.get<int>()});
    }
    int q = jq.get<int>();
    if (q < 2) fail("DegreeTooSmall", "q = " + std::to_string(q) + " (need q >= 2)");
    return build_tree(CoreGraph(std::move(labels), edges), std::move(grafts), q);
  } catch (const json::exception& e) {
    fail("MalformedSpec", e.what());
  }
}

inline AsymptoticTree load_graph_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("FileNotFound", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail("MalformedSpec", e.what());
  }
  return graph_from_json(j);
}

inline json graph_to_json(const AsymptoticTree& G) {
  json j;
  j["q"] = G.q();
  json core;
  core["vertices"] = G.core().labels();
  json edges = json::array();
  for (const auto& [a, b] : G.core().edges()) edges.push_back({G.core().label(a), G.core().label(b)});
  core["edges"] = edges;
  j["core"] = core;
  json grafts = json::array();
  for (const auto& g : G.grafts()) grafts.push_back({{"vertex", g.vertex}, {"count", g.count}});
  j["grafts"] = grafts;
  return j;
}

inline json poly_to_json(const Poly& p) {
  json a = json::array();
  for (const auto& c : p.coeffs()) a.push_back(to_string(c));
  return a;
}

inline Poly poly_from_json(const json& a) {
  std::vector<Rational> c;
  for (const auto& x : a) {
    if (!x.is_string()) fail("MalformedSpec", "coefficients must be strings");
    c.push_back(parse_rational(x.get<std::string>()));
  }
  return Poly(std::move(c));
}

inline json ratfunc_to_json(const RationalFunction& r) {
  return {{"num", poly_to_json(r.num())}, {"den", poly_to_json(r.den())}};
}

inline RationalFunction ratfunc_from_json(const json& j) {
  return RationalFunction(poly_from_json(j.at("num")), poly_from_json(j.at("den")));
}

/// Exact serialization: q plus num/den coefficient arrays of both parts.
inline json surd_to_json(const SurdFunction& f) {
  return {{"q", f.q()}, {"rat", ratfunc_to_json(f.rat())}, {"surd", ratfunc_to_json(f.surd())}};
}

inline SurdFunction surd_from_json(const json& j) {
  try {
    return SurdFunction(ratfunc_from_json(j.at("rat")), ratfunc_from_json(j.at("surd")), j.at("q").get<int>());
  } catch (const json::exception& e) {
    fail("MalformedSpec", e.what());
  }
}

/// Shortest decimal with `digits` significant digits.
inline std::string format_double(double x, int digits = 15) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

}  // namespace actree
