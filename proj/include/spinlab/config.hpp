#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spinlab/energy.hpp"
#include "spinlab/grid.hpp"

namespace spinlab {

struct SolverConfig {
    double min_tol = 1e-8;
    int min_max_iters = 200000;
    double shoot_tol = 1e-8;
    int shoot_max_newton = 20;
    double gmres_tol = 1e-4;
    int gmres_max_iters = 80;
    double dt = 0.0;  // 0 selects the automatic step
    double gap_tol = 1e-3;
    double clearance_tol = 1e-8;
    bool operator==(const SolverConfig&) const = default;
};

struct RunSettings {
    std::uint64_t seed = 12345;
    int threads = 1;
    std::string output_dir = "out";
    bool operator==(const RunSettings&) const = default;
};

/// Full run configuration, archived as sectioned key = value text.
struct RunConfig {
    ShapeSpec shape;
    std::array<int, 3> resolution = {16, 16, 16};
    SimParams params;
    SolverConfig solver;
    RunSettings run;
    bool operator==(const RunConfig&) const = default;
};

struct ConfigIssue {
    int line;  // 0 when no single line applies
    std::string message;
};

/// Carries every problem found in a config, not just the first.
struct ConfigParseError : Error {
    std::vector<ConfigIssue> issues;
    explicit ConfigParseError(std::vector<ConfigIssue> issues_in);
};

/// Parses the documented sectioned key = value grammar. Minimal input needs
/// shape.kind, shape.aspect, shape.resolution and params.eta; everything
/// else has defaults. Throws ConfigParseError listing all problems.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Canonical serialization; parse(serialize(c)) == c holds exactly.
std::string serialize_config(const RunConfig& cfg);

/// FNV-1a hash of the canonical serialization (manifest identity).
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace spinlab
