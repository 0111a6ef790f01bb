#include "multimon/netlist.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "multimon/errors.hpp"

namespace multimon {

std::vector<int> Netlist::junction_branches() const {
  std::vector<int> out;
  for (int b = 0; b < static_cast<int>(branches.size()); ++b) {
    if (branches[b].has_junction()) out.push_back(b);
  }
  return out;
}

std::string Netlist::validate() const {
  if (node_count < 2) throw ConfigError("netlist needs at least 2 nodes");
  if (static_cast<int>(ground_caps_ff.size()) != node_count) {
    throw ConfigError("ground_caps_ff must list one capacitance per node");
  }
  for (int n = 0; n < node_count; ++n) {
    if (!(ground_caps_ff[n] > 0.0)) {
      throw ConfigError("ground capacitance of node " + std::to_string(n + 1) +
                        " must be positive");
    }
  }
  std::set<std::pair<int, int>> seen;
  for (const Branch& b : branches) {
    if (b.i < 0 || b.i >= node_count || b.j < 0 || b.j >= node_count) {
      throw ConfigError("branch endpoint out of range");
    }
    if (b.i == b.j) throw ConfigError("branch endpoints must be distinct");
    auto key = std::minmax(b.i, b.j);
    if (!seen.insert(key).second) {
      throw ConfigError("duplicate branch between nodes " +
                        std::to_string(key.first + 1) + " and " +
                        std::to_string(key.second + 1));
    }
    if (b.ej_ghz < 0.0 || b.l_nh < 0.0 || b.c_ff < 0.0) {
      throw ConfigError("branch element values must be non-negative");
    }
  }
  std::string warning;
  if (std::abs(flux_phi0) > 0.25) {
    warning = "external flux |" + std::to_string(flux_phi0) +
              "| exceeds a quarter flux quantum; device may be unstable";
    std::cerr << "warning: " << warning << "\n";
  }
  return warning;
}

Netlist parse_netlist(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("netlist parse error: ") + e.what());
  }
  Netlist nl;
  try {
    nl.node_count = j.at("nodes").get<int>();
    for (const auto& jb : j.at("branches")) {
      Branch b;
      b.i = jb.at("i").get<int>() - 1;
      b.j = jb.at("j").get<int>() - 1;
      b.ej_ghz = jb.value("ej_ghz", 0.0);
      b.l_nh = jb.value("l_nh", 0.0);
      b.c_ff = jb.value("c_ff", 0.0);
      nl.branches.push_back(b);
    }
    nl.ground_caps_ff = j.at("ground_caps_ff").get<std::vector<double>>();
    nl.flux_phi0 = j.value("flux_phi0", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("netlist field error: ") + e.what());
  }
  nl.validate();
  return nl;
}

Netlist load_netlist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open netlist file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_netlist(ss.str());
}

std::string netlist_to_json(const Netlist& nl) {
  nlohmann::json j;
  j["nodes"] = nl.node_count;
  j["branches"] = nlohmann::json::array();
  for (const Branch& b : nl.branches) {
    nlohmann::json jb;
    jb["i"] = b.i + 1;
    jb["j"] = b.j + 1;
    jb["ej_ghz"] = b.ej_ghz;
    jb["l_nh"] = b.l_nh;
    jb["c_ff"] = b.c_ff;
    j["branches"].push_back(jb);
  }
  j["ground_caps_ff"] = nl.ground_caps_ff;
  j["flux_phi0"] = nl.flux_phi0;
  return j.dump(2);
}

}  // namespace multimon
