#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fsp/config.hpp"

namespace fsp {

// Run record: config echo, version, wall time, the output files that were
// written (with sizes), and the key scalar results. Written to manifest.json
// after every output file, so its presence marks a completed run.
struct RunManifest {
    std::string scenario;
    std::string version;
    std::uint64_t seed = 0;
    bool success = false;
    std::string error;
    std::vector<std::string> notes;
    double wall_time_s = 0.0;
    std::vector<std::pair<std::string, std::uint64_t>> outputs;  // relative path, bytes
    std::map<std::string, double> results;
    std::string config_echo;
};

std::string manifest_to_json(const RunManifest& manifest);

// Runs the configured scenario, writing all outputs under cfg.out_dir and the
// manifest last. Module errors are captured into the manifest (success =
// false); the manifest is still written.
RunManifest run_scenario(const ScenarioConfig& cfg);

}  // namespace fsp
