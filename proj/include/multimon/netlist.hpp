#pragma once

#include <optional>
#include <string>
#include <vector>

namespace multimon {

// One two-terminal element group between a pair of nodes. A branch may carry
// any combination of a Josephson junction (ej_ghz, E/h), a linear inductor
// (l_nh) and a capacitor (c_ff).
struct Branch {
  int i = 0;  // 0-based node index
  int j = 0;
  double ej_ghz = 0.0;
  double l_nh = 0.0;  // 0 means absent
  double c_ff = 0.0;

  bool has_junction() const { return ej_ghz > 0.0; }
  bool has_inductor() const { return l_nh > 0.0; }
};

// Lumped-element circuit: N nodes, branches between node pairs, per-node
// ground capacitances and a single external loop flux in units of Phi0.
struct Netlist {
  int node_count = 0;
  std::vector<Branch> branches;
  std::vector<double> ground_caps_ff;
  double flux_phi0 = 0.0;

  // Indices into `branches` of the junction-carrying branches, in file order.
  std::vector<int> junction_branches() const;

  // Throws ConfigError if any structural invariant is violated. Emits a
  // warning to stderr (and returns it) when |flux| exceeds a quarter flux
  // quantum; larger flux risks phase slips.
  std::string validate() const;
};

// JSON (de)serialization. Field names: nodes, branches[{i,j,ej_ghz,l_nh,c_ff}],
// ground_caps_ff, flux_phi0. Node indices in files are 1-based.
Netlist parse_netlist(const std::string& json_text);
Netlist load_netlist(const std::string& path);
std::string netlist_to_json(const Netlist& nl);

}  // namespace multimon
