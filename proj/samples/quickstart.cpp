// Spectrum and a few walk amplitudes for a spec file (default: the K_4 core with q = 10).

#include <iostream>

#include "actree/ctqw.hpp"

using namespace actree;

int main(int argc, char** argv) {
  std::string path = argc > 1 ? argv[1] : std::string(ACTREE_SAMPLES_DIR) + "/k4_q10.json";
  auto G = load_graph_spec(path);
  GeneratingBundle bundle(G);
  auto rep = compute_spectrum(bundle);

  std::cout << "band [-" << rep.band_edge() << ", " << rep.band_edge() << "]\n";
  for (const auto& r : rep.pure_point) {
    auto ex = r.exact_value();
    std::cout << "lambda = " << format_double(r.value, 12) << (ex ? " (" + to_string(*ex) + ")" : "") << "  "
              << to_string(r.location) << ", multiplicity " << r.multiplicity << "\n";
  }

  auto u = VertexAddress::core(G.core().label(0));
  std::cout << "Q_{u,u} series:";
  for (const auto& c : assemble_Q(bundle, u, u).series(6)) std::cout << " " << to_string(c);
  std::cout << "\ntrapping probability at " << u.str() << ": " << trapping_probability(rep, G, u) << "\n";

  AmplitudeEngine<double> walk(bundle, rep, u, u);
  for (double t : {0.0, 5.0, 20.0, 100.0}) std::cout << "P_" << t << "(u,u) = " << walk.probability(t) << "\n";
}
