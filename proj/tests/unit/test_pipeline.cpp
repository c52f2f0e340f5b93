#include "elvol/panel_io.hpp"
#include "elvol/pipeline.hpp"
#include "elvol/series_io.hpp"

#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace elvol;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

PipelineConfig small_config(const fs::path& out) {
    auto c = parse_pipeline_config(R"({
        "simulation": {"modes": 2, "kappa": 30, "zero_mode_lambda": -20, "mode_sigma": [1, 1, 1],
                       "days": 900, "seed": 4, "drift": {"level": 40, "trend_per_day": 0.01,
                       "weekly": [1, 1, 1, 1, 1, -2, -3]}},
        "partition": {"bins": 5},
        "fine_grid": 120,
        "semigroup": {"burn_in_days": 200},
        "stats": {"nic_bins": 5}
    })");
    c.output_dir = out;
    return c;
}

const fs::path kRoot = fs::temp_directory_path() / "elvol_pipeline_test";

} // namespace

TEST_CASE("full run writes every artifact and a manifest") {
    fs::remove_all(kRoot);
    const auto cfg = small_config(kRoot / "a");
    run_pipeline(cfg);
    const auto zone = kRoot / "a" / "SIM";
    for (const char* name :
         {"panel.csv", "panel.json", "truth.json", "demeaned.csv", "mhat.csv", "semigroup_S.csv",
          "semigroup_spectrum.json", "propagation_report.csv", "rcv_naive.csv", "rcv_adjusted.csv",
          "rcv_adjusted_long_span.csv", "realized_correlation.csv", "factor_loadings.csv", "factor_scores.csv",
          "loading_surfaces.csv", "stationarity.csv", "nic_spec1.csv", "nic_spec4.csv", "leverage_curves.csv"}) {
        CHECK_MESSAGE(fs::exists(zone / name), name);
    }
    const auto manifest = nlohmann::json::parse(slurp(kRoot / "a" / "manifest.json"));
    CHECK(manifest.at("config_hash").get<std::string>() == config_hash(cfg));
    CHECK(manifest.at("config").at("rcv").at("window").get<int>() == 7);
    CHECK(manifest.at("config").at("rcv").at("delta").get<double>() == doctest::Approx(1.0 / 365.0));
}

TEST_CASE("outputs are deterministic and stages rerun bit-identically") {
    const auto cfg = small_config(kRoot / "b");
    run_pipeline(cfg);
    const auto a = kRoot / "a" / "SIM";
    const auto b = kRoot / "b" / "SIM";
    for (const auto& entry : fs::directory_iterator(a)) {
        CHECK_MESSAGE(slurp(entry.path()) == slurp(b / entry.path().filename()), entry.path().filename().string());
    }
    const auto before = slurp(b / "rcv_adjusted.csv");
    run_stage(cfg, Stage::Rcv, "SIM");
    CHECK(slurp(b / "rcv_adjusted.csv") == before);
}

TEST_CASE("adjusted long-span output tracks the simulation truth") {
    // A long detrending window keeps the fitted-mean noise out of the increments.
    auto cfg = small_config(kRoot / "oracle");
    cfg.simulation->days = 2000;
    cfg.detrend.bandwidth_days = 365.0;
    run_stage(cfg, Stage::Simulate, "SIM");
    for (auto stage : {Stage::Detrend, Stage::Semigroup, Stage::Rcv}) {
        run_stage(cfg, stage, "SIM");
    }
    std::ifstream csv(cfg.output_dir / "SIM" / "rcv_adjusted.csv");
    std::ifstream manifest(cfg.output_dir / "SIM" / "rcv_adjusted.json");
    const Matrix estimate = long_span_average(read_rcv(csv, manifest));
    const Matrix target = population_moments(*cfg.simulation).adjusted_target;
    CHECK((estimate - target).norm() / target.norm() < 0.10);
}

TEST_CASE("stage errors carry the stage and zone") {
    auto cfg = small_config(kRoot / "empty");
    try {
        run_stage(cfg, Stage::Detrend, "SIM");
        FAIL("expected an error");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("[stage detrend]") != std::string::npos);
        CHECK(msg.find("SIM") != std::string::npos);
    }
}

TEST_CASE("ingest of a csv export") {
    fs::create_directories(kRoot);
    const auto csv = kRoot / "prices.csv";
    {
        std::ofstream out(csv);
        out << "timestamp,zone,price\n";
        for (int n = 0; n < 3; ++n) {
            for (int h = 0; h < 24; ++h) {
                out << "2024-01-0" << n + 1 << " " << (h < 10 ? "0" : "") << h << ":00,NO1," << n * 24 + h << "\n";
            }
        }
    }
    auto cfg = parse_pipeline_config(R"({"inputs": [{"zone": "NO1", "csv": ")" + csv.string() + R"("}]})");
    cfg.output_dir = kRoot / "ingest";
    run_stage(cfg, Stage::Ingest, "NO1");
    const auto panel = load_panel(cfg.output_dir / "NO1" / "panel.csv", cfg.output_dir / "NO1" / "panel.json");
    CHECK(panel.rows() == 3);
    CHECK(panel.values()(2, 23) == 71.0);
    CHECK_THROWS_AS(run_stage(cfg, Stage::Ingest, "XX"), Error);
}
