#include "elvol/pipeline.hpp"
#include "elvol/validation.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> bandwidth_days;
    bool no_dow_dummies = false;
    std::optional<std::size_t> refit_days;
    std::optional<std::size_t> burn_in_days;
    std::optional<double> ridge;
    std::optional<std::size_t> window;
    std::optional<double> delta;
    bool disjoint = false;
};

void add_detrend_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--bandwidth-days", args.bandwidth_days, "Kernel bandwidth of the seasonal mean (days)");
    cmd->add_flag("--no-dow-dummies", args.no_dow_dummies, "Drop the day-of-week dummies");
}

void add_semigroup_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--refit-days", args.refit_days, "Days between refits");
    cmd->add_option("--burn-in-days", args.burn_in_days, "Rows before the first refit");
    cmd->add_option("--ridge", args.ridge, "Ridge added to the Gram matrix");
}

void add_rcv_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--window", args.window, "Window length in days");
    cmd->add_option("--delta", args.delta, "Year fraction of one step");
    cmd->add_flag("--disjoint", args.disjoint, "Non-overlapping windows");
}

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* opt = cmd->add_option("--config", args.config, "Pipeline configuration (JSON)");
    if (config_required) {
        opt->required();
    }
    cmd->add_option("--out", args.out, "Output directory (overrides output_dir)");
    cmd->add_option("--seed", args.seed, "Simulation seed (overrides simulation.seed)");
}

elvol::PipelineConfig effective_config(const CommonArgs& args, bool default_simulation) {
    elvol::PipelineConfig config;
    if (!args.config.empty()) {
        config = elvol::load_pipeline_config(args.config);
    } else if (default_simulation) {
        config.simulation = elvol::SimConfig{};
        config.simulation->partition = config.partition;
    }
    if (!args.out.empty()) {
        config.output_dir = args.out;
    }
    if (args.seed) {
        if (!config.simulation) {
            throw elvol::Error("--seed given but the configuration has no 'simulation' section");
        }
        config.simulation->seed = *args.seed;
    }
    if (args.bandwidth_days) {
        config.detrend.bandwidth_days = *args.bandwidth_days;
    }
    if (args.no_dow_dummies) {
        config.detrend.dow_dummies = false;
    }
    if (args.refit_days) {
        config.refit_days = *args.refit_days;
    }
    if (args.burn_in_days) {
        config.burn_in_days = *args.burn_in_days;
    }
    if (args.ridge) {
        config.semigroup.ridge = *args.ridge;
    }
    if (args.window) {
        config.rcv.window = *args.window;
    }
    if (args.delta) {
        config.rcv.delta = *args.delta;
    }
    if (args.disjoint) {
        config.rcv.rolling = false;
    }
    // command-line overrides go through the same validation as the file
    elvol::parse_pipeline_config(elvol::pipeline_config_json(config));
    return config;
}

int run_stage_everywhere(const elvol::PipelineConfig& config, elvol::Stage stage) {
    int status = 0;
    for (const auto& zone : elvol::pipeline_zones(config)) {
        if (stage == elvol::Stage::Simulate && zone != "SIM") {
            continue;
        }
        try {
            elvol::run_stage(config, stage, zone);
        } catch (const std::exception& e) {
            std::cerr << e.what() << '\n';
            status = 1;
        }
    }
    return status;
}

std::map<std::string, double> parse_overrides(const std::vector<std::string>& items) {
    std::map<std::string, double> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw elvol::Error(fmt::format("tolerance override '{}' is not key=value", item));
        }
        try {
            out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw elvol::Error(fmt::format("tolerance override '{}' has a non-numeric value", item));
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Realized covariation of electricity price panels"};
    app.require_subcommand(1);

    struct StageCommand {
        const char* name;
        const char* help;
        elvol::Stage stage;
    };
    const std::vector<StageCommand> stages{
        {"ingest", "Parse raw exports into price panels", elvol::Stage::Ingest},
        {"detrend", "Remove the local-linear seasonal mean", elvol::Stage::Detrend},
        {"semigroup", "Estimate the propagation matrices and residuals", elvol::Stage::Semigroup},
        {"rcv", "Naive and adjusted realized covariation", elvol::Stage::Rcv},
        {"factors", "Eigen-decomposition, scores and loading surfaces", elvol::Stage::Factors},
        {"stats", "Stationarity tests, news impact and leverage curves", elvol::Stage::Stats},
    };
    std::vector<CommonArgs> stage_args(stages.size());
    std::vector<CLI::App*> stage_cmds;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        auto* cmd = app.add_subcommand(stages[k].name, stages[k].help);
        add_common(cmd, stage_args[k], stages[k].stage == elvol::Stage::Ingest);
        if (stages[k].stage == elvol::Stage::Detrend) {
            add_detrend_flags(cmd, stage_args[k]);
        } else if (stages[k].stage == elvol::Stage::Semigroup) {
            add_semigroup_flags(cmd, stage_args[k]);
        } else if (stages[k].stage == elvol::Stage::Rcv) {
            add_rcv_flags(cmd, stage_args[k]);
        }
        stage_cmds.push_back(cmd);
    }

    CommonArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Simulate a heat-SPDE price panel with its truth");
    add_common(simulate, sim_args, false);

    CommonArgs all_args;
    auto* run_all = app.add_subcommand("run-all", "Run every stage for every zone");
    add_common(run_all, all_args, false);
    add_detrend_flags(run_all, all_args);
    add_semigroup_flags(run_all, all_args);
    add_rcv_flags(run_all, all_args);

    std::vector<std::string> overrides;
    std::vector<int> only;
    std::string report_path;
    std::string work_dir;
    auto* validate = app.add_subcommand("validate", "Run the simulation acceptance suite");
    validate->add_option("--tolerance", overrides, "Threshold override key=value (repeatable)");
    validate->add_option("--only", only, "Criterion ids to run");
    validate->add_option("--out", report_path, "Write the JSON report here");
    validate->add_option("--work-dir", work_dir, "Scratch directory for the determinism check");
    bool list_tolerances = false;
    validate->add_flag("--list-tolerances", list_tolerances, "Print the default thresholds and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t k = 0; k < stages.size(); ++k) {
            if (stage_cmds[k]->parsed()) {
                return run_stage_everywhere(effective_config(stage_args[k], true), stages[k].stage);
            }
        }
        if (simulate->parsed()) {
            return run_stage_everywhere(effective_config(sim_args, true), elvol::Stage::Simulate);
        }
        if (run_all->parsed()) {
            elvol::run_pipeline(effective_config(all_args, true));
            return 0;
        }
        if (validate->parsed()) {
            if (list_tolerances) {
                for (const auto& [key, value] : elvol::default_tolerances()) {
                    std::cout << fmt::format("{} = {}\n", key, value);
                }
                return 0;
            }
            elvol::ValidationOptions options;
            options.overrides = parse_overrides(overrides);
            options.only = only;
            if (!work_dir.empty()) {
                options.work_dir = work_dir;
            }
            const auto report = elvol::run_validation(options);
            std::cout << elvol::report_text(report);
            if (!report_path.empty()) {
                std::ofstream(report_path) << elvol::report_json(report) << '\n';
            }
            return report.all_passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
