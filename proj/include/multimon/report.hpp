#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multimon/design.hpp"

namespace multimon {

inline constexpr const char* kToolVersion = "0.1.0";

// Provenance block embedded in every output file.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::string config;
  std::uint64_t seed = 0;
  bool reproducible = false;  // suppresses the timestamp

  std::string timestamp() const;  // empty when reproducible
  std::string to_json() const;
  // '#'-prefixed header lines for text/CSV outputs.
  std::string to_comment_block() const;
};

std::string analysis_report_text(const DeviceAnalysis& dev,
                                 const SpacingReport& spacing,
                                 const RunManifest& manifest);
std::string analysis_report_json(const DeviceAnalysis& dev,
                                 const SpacingReport& spacing,
                                 const RunManifest& manifest);
std::string analysis_report_csv(const DeviceAnalysis& dev,
                                const SpacingReport& spacing,
                                const RunManifest& manifest);

// Built-in device presets: trimon-symmetric, trimon-design-table, ring6,
// open-ring, linear-chain.
std::vector<std::string> preset_names();
Netlist preset_netlist(const std::string& name);

}  // namespace multimon
