#pragma once

#include "elvol/pipeline.hpp"
#include "elvol/spde_sim.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace elvol {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::map<std::string, double> measured;
    std::map<std::string, double> thresholds;
    double seconds = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<CriterionResult> criteria;
    bool all_passed() const;
};

struct ValidationOptions {
    /// Replaces default thresholds, keyed as in default_tolerances().
    std::map<std::string, double> overrides;
    /// Criterion ids to run (all when empty).
    std::vector<int> only;
    /// Scratch space for the determinism check.
    std::filesystem::path work_dir = std::filesystem::temp_directory_path() / "elvol_validation";
};

/// Every threshold used by the suite with its default value.
std::map<std::string, double> default_tolerances();

/// Runs the simulation-oracle acceptance suite. A criterion that throws is
/// recorded as failed with the message in `detail`.
ValidationReport run_validation(const ValidationOptions& options = {});

std::string report_json(const ValidationReport& report);
ValidationReport parse_report_json(const std::string& text);

/// One line per criterion: "[PASS] 1 ... measured ... (threshold ...)".
std::string report_text(const ValidationReport& report);

/// Stationary three-mode heat fixture on seven uniform bins (invertible observation map).
SimConfig three_mode_fixture(std::size_t days, std::uint64_t seed);

/// Pipeline configuration running the simulated zone end to end.
PipelineConfig simulation_pipeline_fixture(const std::filesystem::path& output_dir);

} // namespace elvol
