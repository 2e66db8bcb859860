#pragma once

#include "wdlab/dynamics.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wdlab {

using ordered_json = nlohmann::ordered_json;

enum ExitStatus : int { ExitOk = 0, ExitConfigInvalid = 1, ExitTheoremInconsistent = 2, ExitExperimentError = 3 };

struct OutputPaths {
    std::string report;
    std::string orbits;
    std::string plot;
};

inline const std::vector<std::string> experiment_kinds{"dist", "orbit", "dw", "axioms", "horoball", "gromov", "attractor"};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string kind;
    bool theorem_consistency = false;
    std::optional<MetricSpace> space;
    MapSpec map;
    // validated documents, re-read by the experiment runners
    nlohmann::json space_doc;
    nlohmann::json map_doc;
    nlohmann::json experiment_doc;
    OutputPaths output;
};

// strict: unknown fields, wrong types, nonpositive tolerances and empty grids throw
// Error(ConfigInvalid) with the offending path in the message
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

// the config as echoed in reports (output paths excluded)
ordered_json config_echo(const ExperimentConfig& cfg);

struct RunResult {
    ordered_json report;
    int exit_code = ExitOk;
    std::vector<Orbit> orbits;
    std::optional<Point> marker;
};

RunResult run_experiment(const ExperimentConfig& cfg);

std::string orbit_csv(const std::vector<Orbit>& orbits);
std::string plot_svg(const MetricSpace& space, const std::vector<Orbit>& orbits, const std::optional<Point>& marker);
// report JSON (2-space indent, trailing newline)
std::string report_text(const RunResult& result);

// writes whichever of report / orbits / plot have paths; throws IoError naming the path
void write_outputs(const ExperimentConfig& cfg, const RunResult& result);

} // namespace wdlab
