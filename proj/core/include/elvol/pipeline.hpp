#pragma once

#include "elvol/detrend.hpp"
#include "elvol/panel.hpp"
#include "elvol/rcv.hpp"
#include "elvol/semigroup.hpp"
#include "elvol/spde_sim.hpp"
#include "elvol/stationarity.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace elvol {

/// One raw price export to ingest.
struct InputSpec {
    std::string zone;
    std::filesystem::path csv;
    CsvSchema schema;
    std::string timezone = "UTC"; // market time zone that defines the delivery day
    DstPolicy dst_policy = DstPolicy::Repair;
};

struct PipelineConfig {
    std::vector<InputSpec> inputs;
    std::optional<SimConfig> simulation; // synthetic zone "SIM"
    DeliveryPartition partition = DeliveryPartition::uniform(24);
    std::size_t fine_grid = 96;
    DetrendConfig detrend;
    std::size_t refit_days = 28;
    std::size_t burn_in_days = 364;
    SemigroupOptions semigroup;
    RcvOptions rcv;
    std::size_t factor_components = 3;
    double explained_threshold = 0.95;
    std::vector<int> nic_specs{1, 2, 3, 4};
    std::size_t nic_bins = 20;
    std::size_t nic_hac_lags = 14;
    std::size_t leverage_hac_lags = 14;
    bool stationarity = true;
    KpssNull kpss_null = KpssNull::Level;
    long kpss_lags = -1;
    long adf_max_lags = -1;
    AdfDeterministic adf_spec = AdfDeterministic::Constant;
    std::filesystem::path output_dir = "elvol_out";
};

/// Parses the JSON configuration. Unknown keys and invalid values are errors.
PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration (every default spelled out).
/// The output directory is left out, so relocating a run keeps its hash.
std::string pipeline_config_json(const PipelineConfig& config);

/// 64-bit FNV-1a of the canonical configuration, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

enum class Stage { Ingest, Simulate, Detrend, Semigroup, Rcv, Factors, Stats };

std::string to_string(Stage stage);

/// Zones the configuration produces, in processing order.
std::vector<std::string> pipeline_zones(const PipelineConfig& config);

/// Runs one stage for one zone; inputs and outputs are files under
/// output_dir/<zone>/. Errors are rethrown tagged with stage and zone.
void run_stage(const PipelineConfig& config, Stage stage, const std::string& zone);

/// All stages for every zone, then manifest.json in output_dir.
void run_pipeline(const PipelineConfig& config);

/// Writes output_dir/manifest.json listing the files of every zone.
void write_manifest(const PipelineConfig& config);

} // namespace elvol
