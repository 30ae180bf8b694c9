// actree: command-line front end for the asymptotic-tree library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "actree/ctqw.hpp"

using namespace actree;

namespace {

struct Options {
  std::string spec, u, v, out, format = "csv";
  int order = 10, grid = 201, R = 2, seed = 0;
  double t0 = 0, t1 = 20, nu = 0.5;
  int tn = 21;
  bool oracle = false, tail = false;
};

std::vector<double> time_grid(const Options& o) {
  if (o.tn < 1) fail("InvalidArgument", "--tn must be >= 1");
  std::vector<double> t;
  for (int k = 0; k < o.tn; ++k) t.push_back(o.tn == 1 ? o.t0 : o.t0 + (o.t1 - o.t0) * k / (o.tn - 1));
  return t;
}

VertexAddress address(const AsymptoticTree& G, const std::string& text, const char* flag) {
  if (text.empty()) fail("MissingArgument", std::string(flag) + " is required");
  // A bare label names a core vertex.
  bool prefixed = text.rfind("core:", 0) == 0 || text.rfind("tree:", 0) == 0;
  VertexAddress a = prefixed ? VertexAddress::parse(text) : VertexAddress::core(text);
  G.validate(a);
  return a;
}

std::string num(double x) { return format_double(x, 15); }

// Every CSV starts with the command and all numeric settings.
std::string header(const std::string& cmd, const Options& o) {
  std::ostringstream h;
  h << "# actree " << cmd << " spec=" << o.spec;
  if (!o.u.empty()) h << " u=" << o.u;
  if (!o.v.empty()) h << " v=" << o.v;
  h << "\n# order=" << o.order << " grid=" << o.grid << " R=" << o.R << " t0=" << num(o.t0) << " t1=" << num(o.t1)
    << " tn=" << o.tn << " nu=" << num(o.nu) << " seed=" << o.seed << " quadrature_tol=1e-09\n";
  return h.str();
}

std::string cmd_validate(const Options& o) {
  auto G = load_graph_spec(o.spec);
  std::ostringstream s;
  if (o.format == "json") {
    json j = graph_to_json(G);
    json sig = json::object();
    for (int i = 0; i < G.core().size(); ++i) sig[G.core().label(i)] = G.sigma(i);
    j["sigma"] = sig;
    json v0 = json::array();
    for (int g : G.graft_vertices()) v0.push_back(G.core().label(g));
    j["graft_vertices"] = v0;
    s << j.dump(2) << "\n";
    return s.str();
  }
  s << "q " << G.q() << "\ncore_size " << G.core().size() << "\ngraft_vertices " << G.graft_vertices().size() << ":";
  for (int g : G.graft_vertices()) s << " " << G.core().label(g);
  s << "\nvertex,degree_in_core,grafts,sigma\n";
  for (int i = 0; i < G.core().size(); ++i)
    s << G.core().label(i) << "," << G.core().degree(i) << "," << G.graft_count(i) << "," << G.sigma(i) << "\n";
  return s.str();
}

std::string cmd_genfun(const Options& o) {
  auto G = load_graph_spec(o.spec);
  auto u = address(G, o.u, "--u"), v = address(G, o.v.empty() ? o.u : o.v, "--v");
  if (o.order < 0) fail("InvalidArgument", "--order must be >= 0");
  GeneratingBundle b(G);
  SurdFunction Q = assemble_Q(b, u, v);
  auto series = Q.series(o.order);
  std::vector<Rational> ref;
  if (o.oracle) ref = classical_pn_series(G, u, v, o.order);
  std::ostringstream s;
  if (o.format == "json") {
    json j = {{"u", u.str()}, {"v", v.str()}, {"Q", surd_to_json(Q)}};
    json a = json::array();
    for (size_t n = 0; n < series.size(); ++n) {
      json row = {{"n", n}, {"p", to_string(series[n])}};
      if (o.oracle) row["oracle"] = series[n] == ref[n] ? "match" : "mismatch";
      a.push_back(row);
    }
    j["series"] = a;
    s << j.dump(2) << "\n";
    return s.str();
  }
  s << header("genfun", o) << "# Q = " << Q.str() << "\n";
  s << (o.oracle ? "n,p_n,oracle,verdict\n" : "n,p_n\n");
  for (size_t n = 0; n < series.size(); ++n) {
    s << n << "," << to_string(series[n]);
    if (o.oracle) s << "," << to_string(ref[n]) << "," << (series[n] == ref[n] ? "match" : "mismatch");
    s << "\n";
  }
  return s.str();
}

std::string cmd_spectrum(const Options& o) {
  auto G = load_graph_spec(o.spec);
  GeneratingBundle b(G);
  auto rep = compute_spectrum(b);
  std::ostringstream s;
  if (o.format == "json") {
    s << spectrum_to_json(rep).dump(2) << "\n";
    return s.str();
  }
  s << header("spectrum", o) << "# band_edge=" << num(rep.band_edge()) << "\n";
  s << "lambda,exact,location,origin,multiplicity\n";
  for (const auto& r : rep.pure_point) {
    auto ex = r.exact_value();
    s << format_double(r.value, 17) << "," << (ex ? to_string(*ex) : "") << "," << to_string(r.location) << ","
      << to_string(r.origin) << "," << r.multiplicity << "\n";
  }
  return s.str();
}

std::string cmd_density(const Options& o) {
  auto G = load_graph_spec(o.spec);
  auto u = address(G, o.u, "--u"), v = address(G, o.v.empty() ? o.u : o.v, "--v");
  if (o.grid < 2) fail("InvalidArgument", "--grid must be >= 2");
  GeneratingBundle b(G);
  PairDensity rho(b, u, v);
  const double c = a_value<double>(G.q()) / G.q();
  std::ostringstream s;
  s << header("density", o) << "lambda,rho\n";
  // Chebyshev-spaced interior nodes avoid the edges, where q = 2 densities are singular.
  for (int k = 0; k < o.grid; ++k) {
    double th = std::numbers::pi * (o.grid - k - 0.5) / o.grid;
    s << num(c * std::cos(th)) << "," << num(rho.at_theta(th)) << "\n";
  }
  return s.str();
}

std::string cmd_ctqw(const Options& o) {
  auto G = load_graph_spec(o.spec);
  auto u = address(G, o.u, "--u"), v = address(G, o.v.empty() ? o.u : o.v, "--v");
  GeneratingBundle b(G);
  auto rep = compute_spectrum(b);
  AmplitudeEngine<double> eng(b, rep, u, v);
  std::optional<StationaryPhaseTail> tail;
  if (o.tail) tail = stationary_phase_tail(b, u, v);
  std::ostringstream s;
  s << header("ctqw", o) << (tail ? "t,re_A,im_A,P,re_tail,im_tail\n" : "t,re_A,im_A,P\n");
  for (double t : time_grid(o)) {
    auto A = eng.amplitude(t);
    s << num(t) << "," << num(A.real()) << "," << num(A.imag()) << "," << num(std::norm(A));
    if (tail) {
      // Large-t prediction of the band part only; meaningless near t = 0.
      auto c = t > 0 ? tail->predicted(t) : std::complex<double>(0);
      s << "," << num(c.real()) << "," << num(c.imag());
    }
    s << "\n";
  }
  return s.str();
}

std::string cmd_trap(const Options& o) {
  auto G = load_graph_spec(o.spec);
  auto u = address(G, o.u, "--u");
  if (o.R < 0) fail("InvalidRadius", "R must be >= 0");
  GeneratingBundle b(G);
  auto rep = compute_spectrum(b);
  auto ts = time_grid(o);
  auto P = ball_probability(b, rep, u, o.R, ts);
  std::ostringstream s;
  s << header("trap", o) << "# trapping_probability=" << num(trapping_probability(rep, G, u))
    << " ball_long_time_mean=" << num(ball_trapping_constant(rep, G, u, o.R)) << "\n";
  s << "t,P_ball\n";
  for (size_t k = 0; k < ts.size(); ++k) s << num(ts[k]) << "," << num(P[k]) << "\n";
  return s.str();
}

std::string cmd_front(const Options& o) {
  auto G = load_graph_spec(o.spec);
  auto u = address(G, o.u, "--u");
  if (u.in_tree) fail("InvalidAddress", "front starts at a core graft vertex");
  int g = G.anchor(u);
  GeneratingBundle b(G);
  auto rep = compute_spectrum(b);
  std::ostringstream s;
  s << header("front", o) << "# band_edge=" << num(rep.band_edge()) << " measured=(q-1)^(d-1)|A_t|^2\n";
  s << "t,depth,measured,predicted\n";
  for (double t : time_grid(o)) {
    if (t <= 0) continue;
    auto fp = front_profile(b, rep, g, o.nu, t);
    s << num(t) << "," << fp.depth << "," << num(fp.measured) << "," << num(fp.predicted) << "\n";
  }
  return s.str();
}

int report(const std::string& code, const std::string& message, int status) {
  json j = {{"error", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra, generating functions and quantum walks on asymptotic trees"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--spec", o.spec, "graph spec (JSON)")->required();
    c->add_option("--out", o.out, "output file (default stdout)");
    c->add_option("--seed", o.seed, "recorded in headers; all commands are deterministic");
  };
  auto times = [&](CLI::App* c) {
    c->add_option("--t0", o.t0, "first time");
    c->add_option("--t1", o.t1, "last time");
    c->add_option("--tn", o.tn, "number of times");
  };
  std::map<CLI::App*, std::string (*)(const Options&)> run;

  auto* val = app.add_subcommand("validate", "check a spec and print its summary");
  common(val);
  val->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));
  run[val] = cmd_validate;

  auto* gen = app.add_subcommand("genfun", "exact generating function Q_{u,v} and its series");
  common(gen);
  gen->add_option("--u", o.u)->required();
  gen->add_option("--v", o.v);
  gen->add_option("--order", o.order);
  gen->add_flag("--oracle", o.oracle, "compare against path counting");
  gen->add_option("--format", o.format)->check(CLI::IsMember({"csv", "json"}));
  run[gen] = cmd_genfun;

  auto* spc = app.add_subcommand("spectrum", "pure point spectrum and density coefficients");
  common(spc);
  o.format = "csv";
  spc->add_option("--format", o.format, "json (default) or csv")->check(CLI::IsMember({"csv", "json"}));
  run[spc] = cmd_spectrum;

  auto* den = app.add_subcommand("density", "spectral density rho_{u,v} on the band");
  common(den);
  den->add_option("--u", o.u)->required();
  den->add_option("--v", o.v);
  den->add_option("--grid", o.grid);
  run[den] = cmd_density;

  auto* walk = app.add_subcommand("ctqw", "amplitudes A_t(u,v) of the walk with H = -K");
  common(walk);
  walk->add_option("--u", o.u)->required();
  walk->add_option("--v", o.v);
  walk->add_flag("--tail", o.tail, "add the stationary-phase prediction of the band part");
  times(walk);
  run[walk] = cmd_ctqw;

  auto* trap = app.add_subcommand("trap", "probability of staying within distance R of u");
  common(trap);
  trap->add_option("--u", o.u)->required();
  trap->add_option("--R", o.R);
  times(trap);
  run[trap] = cmd_trap;

  auto* front = app.add_subcommand("front", "shell probability at depth nu*t in a tree at a graft vertex");
  common(front);
  front->add_option("--u", o.u, "graft vertex")->required();
  front->add_option("--nu", o.nu);
  times(front);
  run[front] = cmd_front;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report("InvalidArgument", e.what(), 2);
  }
  if (spc->parsed() && spc->count("--format") == 0) o.format = "json";

  try {
    std::string text;
    for (auto& [cmd, fn] : run)
      if (cmd->parsed()) text = fn(o);
    if (o.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(o.out);
      if (!f) fail("FileNotFound", "cannot write '" + o.out + "'");
      f << text;
    }
  } catch (const Error& e) {
    return report(e.code(), e.what(), e.is_integrity_failure() ? 3 : 2);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 3);
  }
  return 0;
}
