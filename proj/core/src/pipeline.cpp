#include "elvol/pipeline.hpp"

#include "elvol/factor.hpp"
#include "elvol/leverage.hpp"
#include "elvol/panel_io.hpp"
#include "elvol/series_io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace elvol {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kSimZone = "SIM";

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw Error(fmt::format("config: '{}' must be an object", where));
    }
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw Error(fmt::format("config: unknown key '{}' in {}", key, where));
        }
    }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& target, const std::string& where) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        target = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(fmt::format("config: '{}.{}' has the wrong type", where, key));
    }
}

KpssNull parse_kpss_null(const std::string& s) {
    if (s == "level") {
        return KpssNull::Level;
    }
    if (s == "trend") {
        return KpssNull::Trend;
    }
    throw Error(fmt::format("config: kpss_null must be 'level' or 'trend', got '{}'", s));
}

AdfDeterministic parse_adf_spec(const std::string& s) {
    if (s == "n") {
        return AdfDeterministic::None;
    }
    if (s == "c") {
        return AdfDeterministic::Constant;
    }
    if (s == "ct") {
        return AdfDeterministic::Trend;
    }
    throw Error(fmt::format("config: adf_spec must be 'n', 'c' or 'ct', got '{}'", s));
}

VolModel parse_vol_model(const std::string& s) {
    if (s == "constant") {
        return VolModel::Constant;
    }
    if (s == "piecewise") {
        return VolModel::Piecewise;
    }
    if (s == "stochastic") {
        return VolModel::Stochastic;
    }
    throw Error(fmt::format("config: vol_model must be constant, piecewise or stochastic, got '{}'", s));
}

std::string vol_model_name(VolModel m) {
    switch (m) {
    case VolModel::Constant:
        return "constant";
    case VolModel::Piecewise:
        return "piecewise";
    case VolModel::Stochastic:
        return "stochastic";
    }
    return "constant";
}

DeliveryPartition parse_partition(const json& obj) {
    check_keys(obj, {"bins", "breakpoints", "labels"}, "partition");
    std::vector<std::string> labels;
    read_opt(obj, "labels", labels, "partition");
    if (obj.contains("breakpoints")) {
        if (obj.contains("bins")) {
            throw Error("config: partition takes either 'bins' or 'breakpoints', not both");
        }
        std::vector<double> bp;
        read_opt(obj, "breakpoints", bp, "partition");
        return DeliveryPartition::from_breakpoints(std::move(bp), std::move(labels));
    }
    std::size_t bins = 24;
    read_opt(obj, "bins", bins, "partition");
    auto p = DeliveryPartition::uniform(bins);
    if (!labels.empty()) {
        return DeliveryPartition::from_breakpoints({p.breakpoints().begin(), p.breakpoints().end()}, std::move(labels));
    }
    return p;
}

SimConfig parse_simulation(const json& obj) {
    check_keys(obj, {"modes", "kappa", "zero_mode_lambda", "mode_sigma", "vol_model", "vol_segments", "sqrt_factor",
                     "drift", "days", "substeps", "delta", "seed", "start", "stationary_start"},
               "simulation");
    SimConfig s;
    const std::string w = "simulation";
    read_opt(obj, "modes", s.modes, w);
    read_opt(obj, "kappa", s.kappa, w);
    read_opt(obj, "zero_mode_lambda", s.zero_mode_lambda, w);
    if (obj.contains("mode_sigma")) {
        read_opt(obj, "mode_sigma", s.mode_sigma, w);
    } else {
        s.mode_sigma.assign(s.modes + 1, 1.0);
    }
    if (obj.contains("vol_model")) {
        s.vol_model = parse_vol_model(obj.at("vol_model").get<std::string>());
    }
    if (obj.contains("vol_segments")) {
        for (const auto& seg : obj.at("vol_segments")) {
            check_keys(seg, {"start_day", "factor"}, "simulation.vol_segments[]");
            VolSegment v;
            read_opt(seg, "start_day", v.start_day, w);
            read_opt(seg, "factor", v.factor, w);
            s.vol_segments.push_back(v);
        }
    }
    if (obj.contains("sqrt_factor")) {
        const auto& sf = obj.at("sqrt_factor");
        check_keys(sf, {"theta", "xi", "v0"}, "simulation.sqrt_factor");
        read_opt(sf, "theta", s.sqrt_factor.theta, w);
        read_opt(sf, "xi", s.sqrt_factor.xi, w);
        read_opt(sf, "v0", s.sqrt_factor.v0, w);
    }
    if (obj.contains("drift")) {
        const auto& d = obj.at("drift");
        check_keys(d, {"level", "trend_per_day", "weekly"}, "simulation.drift");
        read_opt(d, "level", s.drift.level, w);
        read_opt(d, "trend_per_day", s.drift.trend_per_day, w);
        if (d.contains("weekly")) {
            const auto weekly = d.at("weekly").get<std::vector<double>>();
            if (weekly.size() != 7) {
                throw Error("config: simulation.drift.weekly needs 7 values (Monday first)");
            }
            std::copy(weekly.begin(), weekly.end(), s.drift.weekly.begin());
        }
    }
    read_opt(obj, "days", s.days, w);
    read_opt(obj, "substeps", s.substeps, w);
    read_opt(obj, "delta", s.delta, w);
    read_opt(obj, "seed", s.seed, w);
    read_opt(obj, "stationary_start", s.stationary_start, w);
    if (obj.contains("start")) {
        s.start = parse_date(obj.at("start").get<std::string>());
    }
    return s;
}

InputSpec parse_input(const json& obj) {
    check_keys(obj, {"zone", "csv", "timestamp_column", "zone_column", "price_column", "source_timezone", "timezone",
                     "dst_policy"},
               "inputs[]");
    InputSpec in;
    const std::string w = "inputs[]";
    read_opt(obj, "zone", in.zone, w);
    std::string csv;
    read_opt(obj, "csv", csv, w);
    in.csv = csv;
    if (in.zone.empty() || csv.empty()) {
        throw Error("config: every input needs 'zone' and 'csv'");
    }
    read_opt(obj, "timestamp_column", in.schema.timestamp_column, w);
    read_opt(obj, "zone_column", in.schema.zone_column, w);
    read_opt(obj, "price_column", in.schema.price_column, w);
    read_opt(obj, "source_timezone", in.schema.source_timezone, w);
    read_opt(obj, "timezone", in.timezone, w);
    in.schema.default_zone = in.zone;
    std::string policy = "repair";
    read_opt(obj, "dst_policy", policy, w);
    if (policy == "repair") {
        in.dst_policy = DstPolicy::Repair;
    } else if (policy == "reject") {
        in.dst_policy = DstPolicy::Reject;
    } else {
        throw Error(fmt::format("config: dst_policy must be 'repair' or 'reject', got '{}'", policy));
    }
    TimeZone::named(in.timezone);
    TimeZone::named(in.schema.source_timezone);
    return in;
}

void validate(const PipelineConfig& c) {
    if (c.inputs.empty() && !c.simulation) {
        throw Error("config: no inputs and no simulation; nothing to run");
    }
    std::set<std::string> zones;
    for (const auto& in : c.inputs) {
        if (in.zone == kSimZone) {
            throw Error("config: zone name 'SIM' is reserved for the simulation");
        }
        if (!zones.insert(in.zone).second) {
            throw Error(fmt::format("config: zone '{}' listed twice", in.zone));
        }
    }
    if (c.simulation) {
        c.simulation->validate();
    }
    if (!(c.detrend.bandwidth_days > 0.0)) {
        throw Error("config: detrend.bandwidth_days must be positive");
    }
    if (c.refit_days < 1) {
        throw Error("config: semigroup.refit_days must be at least 1");
    }
    if (c.semigroup.ridge < 0.0) {
        throw Error("config: semigroup.ridge must be nonnegative");
    }
    if (c.rcv.window < 1 || !(c.rcv.delta > 0.0)) {
        throw Error("config: rcv.window must be >= 1 and rcv.delta positive");
    }
    if (!(c.explained_threshold > 0.0 && c.explained_threshold <= 1.0)) {
        throw Error("config: factor.explained_threshold must lie in (0, 1]");
    }
    for (int s : c.nic_specs) {
        if (s < 1 || s > 4) {
            throw Error(fmt::format("config: NIC specification {} is not one of 1..4", s));
        }
    }
    if (c.nic_bins < 1) {
        throw Error("config: stats.nic_bins must be at least 1");
    }
}

fs::path zone_dir(const PipelineConfig& c, const std::string& zone) {
    return c.output_dir / zone;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) {
        throw Error(fmt::format("cannot write {}", p.string()));
    }
    return out;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw Error(fmt::format("missing input {} (run the earlier stage first)", p.string()));
    }
    return in;
}

void write_text(const fs::path& p, const std::string& text) {
    auto out = open_out(p);
    out << text;
    if (!text.empty() && text.back() != '\n') {
        out << '\n';
    }
}

json read_json(const fs::path& p) {
    auto in = open_in(p);
    try {
        json doc;
        in >> doc;
        return doc;
    } catch (const json::exception& e) {
        throw Error(fmt::format("{}: {}", p.string(), e.what()));
    }
}

std::vector<std::string> component_labels(std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t i = 1; i <= k; ++i) {
        out.push_back(fmt::format("pc{}", i));
    }
    return out;
}

json spectrum_json(const Matrix& s) {
    const auto sp = spectrum(s);
    json ev = json::array();
    for (const auto& z : sp.eigenvalues) {
        ev.push_back({{"re", z.real()}, {"im", z.imag()}, {"modulus", std::abs(z)}});
    }
    json out{{"eigenvalues", ev}};
    switch (sp.kind) {
    case HalfLife::Finite:
        out["half_life_days"] = sp.half_life_days;
        out["half_life"] = "finite";
        break;
    case HalfLife::Instant:
        out["half_life_days"] = 0.0;
        out["half_life"] = "instant";
        break;
    case HalfLife::Undefined:
        out["half_life_days"] = nullptr;
        out["half_life"] = "undefined";
        break;
    }
    return out;
}

DemeanedPanel read_demeaned(const fs::path& dir) {
    auto in = open_in(dir / "demeaned.csv");
    auto table = read_dated_matrix_csv(in);
    const auto meta = read_json(dir / "detrend.json");
    DemeanedPanel d;
    d.valid_from = meta.at("valid_from").get<std::size_t>();
    d.dates = std::move(table.dates);
    d.values = std::move(table.values);
    d.labels = std::move(table.labels);
    d.config.bandwidth_days = meta.at("bandwidth_days").get<double>();
    d.config.dow_dummies = meta.at("dow_dummies").get<bool>();
    d.valid.assign(d.dates.size(), false);
    for (std::size_t r = d.valid_from; r < d.dates.size(); ++r) {
        d.valid[r] = true;
    }
    return d;
}

RcvSeries read_rcv_files(const fs::path& dir, const std::string& stem) {
    auto csv = open_in(dir / (stem + ".csv"));
    auto manifest = open_in(dir / (stem + ".json"));
    return read_rcv(csv, manifest);
}

std::vector<std::vector<double>> matrix_rows(const Matrix& m) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows.emplace_back();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            rows.back().push_back(m(i, j));
        }
    }
    return rows;
}

void stage_ingest(const PipelineConfig& c, const InputSpec& in, const fs::path& dir) {
    std::ifstream file(in.csv, std::ios::binary);
    if (!file) {
        throw Error(fmt::format("cannot read input {}", in.csv.string()));
    }
    const auto records = parse_price_csv(file, in.schema);
    const auto zone = TimeZone::named(in.timezone);
    const auto panel = build_panel(records, in.zone, c.partition, zone, in.dst_policy);
    save_panel(panel, dir / "panel.csv", dir / "panel.json");
}

void stage_simulate(const PipelineConfig& c, const fs::path& dir) {
    auto sim = *c.simulation;
    sim.partition = c.partition;
    const auto truth = simulate_heat_spde(sim);
    save_panel(truth.panel, dir / "panel.csv", dir / "panel.json");
    json doc;
    doc["modes"] = sim.modes;
    doc["kappa"] = sim.kappa;
    doc["zero_mode_lambda"] = sim.zero_mode_lambda;
    doc["delta"] = sim.delta;
    doc["seed"] = sim.seed;
    doc["rates"] = std::vector<double>(truth.rates.data(), truth.rates.data() + truth.rates.size());
    doc["sigma"] = std::vector<double>(truth.sigma.data(), truth.sigma.data() + truth.sigma.size());
    doc["observation_matrix"] = matrix_rows(truth.observation);
    if (sim.vol_model == VolModel::Constant) {
        try {
            const auto pop = population_moments(sim);
            doc["population_predictor"] = matrix_rows(pop.predictor);
            doc["adjusted_target"] = matrix_rows(pop.adjusted_target);
            doc["propagation_target"] = matrix_rows(pop.propagation_target);
            doc["innovation_target"] = matrix_rows(pop.innovation_target);
        } catch (const Error& e) {
            doc["population_moments"] = e.what();
        }
    }
    write_text(dir / "truth.json", doc.dump(2));
}

void stage_detrend(const PipelineConfig& c, const fs::path& dir) {
    const auto panel = load_panel(dir / "panel.csv", dir / "panel.json");
    const auto dm = local_linear_demean(panel, c.detrend);
    {
        auto out = open_out(dir / "demeaned.csv");
        write_dated_matrix_csv(out, dm.dates, dm.values, dm.labels);
    }
    {
        auto out = open_out(dir / "mhat.csv");
        write_dated_matrix_csv(out, dm.dates, dm.mhat, dm.labels);
    }
    json meta{{"valid_from", dm.valid_from},
              {"valid_from_date", format_date(dm.dates[dm.valid_from])},
              {"bandwidth_days", dm.config.bandwidth_days},
              {"dow_dummies", dm.config.dow_dummies},
              {"kernel", "epanechnikov"}};
    write_text(dir / "detrend.json", meta.dump(2));
}

void stage_semigroup(const PipelineConfig& c, const fs::path& dir) {
    const auto dm = read_demeaned(dir);
    const Matrix rows = dm.valid_rows();
    const auto dates = dm.valid_dates();
    const auto schedule = rolling_semigroup(rows, c.refit_days, c.burn_in_days, c.semigroup);
    const auto d = rows.cols();
    {
        auto out = open_out(dir / "semigroup_S.csv");
        out << "refit_date,refit_row,n_obs,ridge,i,j,value\n";
        for (std::size_t k = 0; k < schedule.estimates.size(); ++k) {
            const auto& e = schedule.estimates[k];
            for (Eigen::Index i = 0; i < d; ++i) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    out << format_date(dates[schedule.refit_rows[k]]) << ',' << schedule.refit_rows[k] << ','
                        << e.n_obs << ',' << format_number(e.ridge) << ',' << i + 1 << ',' << j + 1 << ','
                        << format_number(e.S(i, j)) << '\n';
                }
            }
        }
    }
    const auto full = estimate_semigroup(rows, c.semigroup);
    {
        auto out = open_out(dir / "semigroup_full_S.csv");
        write_matrix_csv(out, full.S, dm.labels, dm.labels);
    }
    json spec;
    spec["full_sample"] = spectrum_json(full.S);
    spec["full_sample"]["ridge"] = full.ridge;
    spec["full_sample"]["auto_ridge_applied"] = full.auto_ridge_applied;
    spec["full_sample"]["condition"] = full.condition;
    spec["full_sample"]["n_obs"] = full.n_obs;
    json refits = json::array();
    for (std::size_t k = 0; k < schedule.estimates.size(); ++k) {
        auto entry = spectrum_json(schedule.estimates[k].S);
        entry["refit_date"] = format_date(dates[schedule.refit_rows[k]]);
        entry["ridge"] = schedule.estimates[k].ridge;
        entry["auto_ridge_applied"] = schedule.estimates[k].auto_ridge_applied;
        refits.push_back(std::move(entry));
    }
    spec["refits"] = std::move(refits);
    spec["refit_days"] = c.refit_days;
    spec["burn_in_days"] = c.burn_in_days;
    write_text(dir / "semigroup_spectrum.json", spec.dump(2));

    const auto res = propagation_residuals(rows, schedule);
    const auto res_dates = residual_dates(res, dates);
    {
        auto out = open_out(dir / "residuals_eps.csv");
        write_dated_matrix_csv(out, res_dates, res.eps, dm.labels);
    }
    {
        auto out = open_out(dir / "residuals_bhat.csv");
        write_dated_matrix_csv(out, res_dates, res.bhat, dm.labels);
    }

    const auto full_res = propagation_residuals(rows, SemigroupSchedule::constant(full));
    const auto ps = propagation_share(full_res, c.rcv.delta);
    {
        auto out = open_out(dir / "propagation_report.csv");
        out << "hour,ps,propagation_level,innovation_level,total_level\n";
        for (Eigen::Index h = 0; h < d; ++h) {
            out << dm.labels[static_cast<std::size_t>(h)] << ',' << format_number(ps.ps_per_hour(h)) << ','
                << format_number(ps.propagation_level(h)) << ',' << format_number(ps.innovation_level(h)) << ','
                << format_number(ps.total_level(h)) << '\n';
        }
        out << "total," << format_number(ps.ps_total) << ",,,\n";
    }
}

void stage_rcv(const PipelineConfig& c, const fs::path& dir) {
    const auto dm = read_demeaned(dir);
    auto eps_in = open_in(dir / "residuals_eps.csv");
    const auto eps = read_dated_matrix_csv(eps_in);
    const auto naive = rcv_naive(dm.valid_rows(), dm.valid_dates(), c.rcv);
    ResidualPanel res;
    res.eps = eps.values;
    const auto adjusted = rcv_adjusted(res, eps.dates, c.rcv);
    for (const auto& [series, stem] : {std::pair{&naive, "rcv_naive"}, std::pair{&adjusted, "rcv_adjusted"}}) {
        {
            auto out = open_out(dir / fmt::format("{}.csv", stem));
            write_rcv_long_csv(out, *series);
        }
        write_text(dir / fmt::format("{}.json", stem), rcv_manifest_json(*series));
        auto out = open_out(dir / fmt::format("{}_long_span.csv", stem));
        write_matrix_csv(out, long_span_average(*series), dm.labels, dm.labels);
    }
    {
        auto out = open_out(dir / "log_vol_heatmap.csv");
        write_log_diagonal_csv(out, adjusted, dm.labels);
    }
    {
        auto out = open_out(dir / "realized_correlation.csv");
        write_matrix_csv(out, realized_correlation(long_span_average(adjusted)), dm.labels, dm.labels);
    }
    const auto panel = load_panel(dir / "panel.csv", dir / "panel.json");
    const Vector w = panel.partition().average_weights();
    {
        auto out = open_out(dir / "rv_average_price.csv");
        out << "date,series,value\n";
        for (const auto& [series, name] : {std::pair{&naive, "naive"}, std::pair{&adjusted, "adjusted"}}) {
            const Vector rv = rv_average_price(*series, w);
            for (std::size_t k = 0; k < series->size(); ++k) {
                out << format_date(series->dates[k]) << ',' << name << ','
                    << format_number(rv(static_cast<Eigen::Index>(k))) << '\n';
            }
        }
    }
}

void stage_factors(const PipelineConfig& c, const fs::path& dir) {
    const auto adjusted = read_rcv_files(dir, "rcv_adjusted");
    const auto panel = load_panel(dir / "panel.csv", dir / "panel.json");
    const auto& labels = panel.partition().labels();
    const auto decomp = eigendecompose(long_span_average(adjusted));
    const auto d = decomp.dim();
    const auto k = std::min(c.factor_components, d);
    {
        auto out = open_out(dir / "factor_loadings.csv");
        write_matrix_csv(out, decomp.loadings, labels, component_labels(d));
    }
    const auto scores = factor_scores(decomp, rcv_diagonals(adjusted), adjusted.dates, k);
    {
        auto out = open_out(dir / "factor_scores.csv");
        write_dated_matrix_csv(out, scores.dates, scores.scores, component_labels(k));
    }
    const auto surfaces = rolling_loadings(adjusted, k);
    {
        auto out = open_out(dir / "loading_surfaces.csv");
        out << "date,component,hour,value\n";
        for (std::size_t comp = 0; comp < surfaces.surfaces.size(); ++comp) {
            const auto& s = surfaces.surfaces[comp];
            for (Eigen::Index t = 0; t < s.rows(); ++t) {
                for (Eigen::Index h = 0; h < s.cols(); ++h) {
                    out << format_date(surfaces.dates[static_cast<std::size_t>(t)]) << ',' << comp + 1 << ','
                        << labels[static_cast<std::size_t>(h)] << ',' << format_number(s(t, h)) << '\n';
                }
            }
        }
    }
    json summary;
    summary["eigenvalues"] = std::vector<double>(decomp.eigenvalues.data(), decomp.eigenvalues.data() + d);
    summary["explained"] = std::vector<double>(decomp.explained.data(), decomp.explained.data() + d);
    summary["threshold"] = c.explained_threshold;
    summary["components_for_threshold"] = variance_explained_count(decomp, c.explained_threshold);
    summary["x_definition"] = "diagonal of the adjusted weekly RCV matrix";
    write_text(dir / "factor_summary.json", summary.dump(2));
}

struct StationarityRow {
    std::string series;
    std::string hour;
    std::string test;
    std::optional<TestResult> result;
    std::string error;
};

void stage_stats(const PipelineConfig& c, const fs::path& dir) {
    const auto panel = load_panel(dir / "panel.csv", dir / "panel.json");
    const auto& labels = panel.partition().labels();
    const Matrix& prices = panel.values();
    const auto n = static_cast<Eigen::Index>(panel.rows());
    const auto d = prices.cols();

    if (c.stationarity) {
        std::vector<StationarityRow> rows;
        const Matrix diffs = prices.bottomRows(n - 1) - prices.topRows(n - 1);
        for (const auto& [name, data] : {std::pair<std::string, const Matrix*>{"levels", &prices},
                                         std::pair<std::string, const Matrix*>{"differences", &diffs}}) {
            auto attempt = [&](const std::string& hour, const std::string& test, auto&& fn) {
                StationarityRow row{name, hour, test, std::nullopt, {}};
                try {
                    row.result = fn();
                } catch (const Error& e) {
                    row.error = e.what();
                }
                rows.push_back(std::move(row));
            };
            attempt("all", "kpss_multivariate", [&] { return kpss_multivariate(*data, c.kpss_lags); });
            for (Eigen::Index h = 0; h < d; ++h) {
                const Vector col = data->col(h);
                const auto& label = labels[static_cast<std::size_t>(h)];
                attempt(label, "kpss", [&] { return kpss_univariate(col, c.kpss_null, c.kpss_lags); });
                attempt(label, "adf", [&] { return adf(col, c.adf_max_lags, c.adf_spec); });
            }
        }
        auto out = open_out(dir / "stationarity.csv");
        out << "series,hour,test,statistic,p_value,p_text,reject,lags,n,error\n";
        std::string table = "series        test                 result\n";
        for (const auto& r : rows) {
            if (r.result) {
                const auto& t = *r.result;
                out << r.series << ',' << r.hour << ',' << r.test << ',' << format_number(t.statistic) << ','
                    << format_number(t.p_value) << ',' << t.p_text() << ',' << (t.reject ? 1 : 0) << ',' << t.lags
                    << ',' << t.n << ",\n";
            } else {
                std::string msg = r.error;
                std::replace(msg.begin(), msg.end(), ',', ';');
                out << r.series << ',' << r.hour << ',' << r.test << ",nan,nan,NA,,,," << msg << '\n';
            }
        }
        for (const std::string series : {"levels", "differences"}) {
            std::size_t kpss_rej = 0;
            std::size_t kpss_n = 0;
            std::size_t adf_rej = 0;
            std::vector<double> adf_stats;
            std::vector<double> adf_p;
            for (const auto& r : rows) {
                if (r.series != series) {
                    continue;
                }
                if (r.test == "kpss_multivariate") {
                    table += fmt::format("{:<14}{:<21}", series, "multivariate KPSS");
                    table += r.result ? fmt::format("stat {:.4f}, p {}, {}\n", r.result->statistic, r.result->p_text(),
                                                    r.result->reject ? "Reject" : "Fail to reject")
                                      : fmt::format("NA ({})\n", r.error);
                } else if (r.test == "kpss" && r.result) {
                    ++kpss_n;
                    kpss_rej += r.result->reject ? 1 : 0;
                } else if (r.test == "adf" && r.result) {
                    adf_rej += r.result->reject ? 1 : 0;
                    adf_stats.push_back(r.result->statistic);
                    adf_p.push_back(r.result->p_value);
                }
            }
            auto median = [](std::vector<double> v) {
                if (v.empty()) {
                    return std::numeric_limits<double>::quiet_NaN();
                }
                std::sort(v.begin(), v.end());
                const auto m = v.size() / 2;
                return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
            };
            table += fmt::format("{:<14}{:<21}{}/{} reject\n", series, "KPSS", kpss_rej, kpss_n);
            table += fmt::format("{:<14}{:<21}median {:.3f}, median p {:.4f}, {}/{} reject\n", series, "ADF",
                                 median(adf_stats), median(adf_p), adf_rej, adf_stats.size());
        }
        write_text(dir / "stationarity.txt", table);
    }

    // Weekly averages and their non-overlapping changes, indexed by panel row.
    const Vector w = panel.partition().average_weights();
    const auto week = static_cast<Eigen::Index>(c.rcv.window);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Vector pbar = Vector::Constant(n, nan);
    Matrix pbar_hour = Matrix::Constant(n, d, nan);
    for (Eigen::Index t = week - 1; t < n; ++t) {
        pbar_hour.row(t) = prices.middleRows(t - week + 1, week).colwise().mean();
        pbar(t) = pbar_hour.row(t).dot(w.transpose());
    }
    std::map<Date, Eigen::Index> row_of;
    for (Eigen::Index t = 0; t < n; ++t) {
        row_of[panel.dates()[static_cast<std::size_t>(t)]] = t;
    }
    auto lookup = [&](const Vector& v, Date date, long offset) {
        const auto it = row_of.find(add_days(date, -offset));
        return it == row_of.end() ? nan : v(it->second);
    };
    auto dpbar_lag = [&](Date date) { return lookup(pbar, date, week) - lookup(pbar, date, 2 * week); };

    auto scores_in = open_in(dir / "factor_scores.csv");
    const auto scores = read_dated_matrix_csv(scores_in);
    std::map<Date, double> s1;
    for (std::size_t k = 0; k < scores.dates.size(); ++k) {
        s1[scores.dates[k]] = scores.values(static_cast<Eigen::Index>(k), 0);
    }
    std::vector<double> y;
    std::vector<double> x;
    std::vector<double> c_price;
    std::vector<double> c_score;
    for (const auto& [date, value] : s1) {
        const auto prev = s1.find(add_days(date, -week));
        if (prev == s1.end() || !(value > 0.0) || !(prev->second > 0.0)) {
            continue;
        }
        const double driver = dpbar_lag(date);
        const double level = lookup(pbar, date, week);
        if (!std::isfinite(driver) || !std::isfinite(level)) {
            continue;
        }
        y.push_back(std::log(value) - std::log(prev->second));
        x.push_back(driver);
        c_price.push_back(std::asinh(level));
        c_score.push_back(std::log(prev->second));
    }
    auto to_vec = [](const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); };
    {
        auto summary = open_out(dir / "nic_summary.csv");
        summary << "spec,n,beta0,beta_plus,se_plus,beta_minus,se_minus,wald_stat,wald_p\n";
        for (int spec : c.nic_specs) {
            const auto s = static_cast<NicSpec>(spec);
            const Matrix ctrl = nic_controls(s, to_vec(c_price), to_vec(c_score));
            const auto curve = binned_nic(to_vec(y), to_vec(x), ctrl, s, c.nic_bins, c.nic_hac_lags);
            auto out = open_out(dir / fmt::format("nic_spec{}.csv", spec));
            out << "bin,lower_edge,center,count,mu,se,lo,hi\n";
            for (Eigen::Index b = 0; b < curve.mu.size(); ++b) {
                out << b + 1 << ',' << format_number(curve.edges(b)) << ',' << format_number(curve.centers(b)) << ','
                    << curve.counts(b) << ',' << format_number(curve.mu(b)) << ',' << format_number(curve.se(b)) << ','
                    << format_number(curve.lo(b)) << ',' << format_number(curve.hi(b)) << '\n';
            }
            summary << spec << ',' << y.size() << ',' << format_number(curve.piecewise.coef(0)) << ','
                    << format_number(curve.beta_plus()) << ',' << format_number(curve.piecewise.se(1)) << ','
                    << format_number(curve.beta_minus()) << ',' << format_number(curve.piecewise.se(2)) << ','
                    << format_number(curve.wald.statistic) << ',' << format_number(curve.wald.p_value) << '\n';
        }
    }

    const auto adjusted = read_rcv_files(dir, "rcv_adjusted");
    std::map<Date, std::size_t> window_of;
    for (std::size_t k = 0; k < adjusted.size(); ++k) {
        window_of[adjusted.dates[k]] = k;
    }
    std::vector<std::size_t> keep;
    std::vector<double> driver;
    for (std::size_t k = 0; k < adjusted.size(); ++k) {
        const auto date = adjusted.dates[k];
        const double dp = dpbar_lag(date);
        const auto prev = window_of.find(add_days(date, -week));
        const auto prow = row_of.find(add_days(date, -week));
        if (!std::isfinite(dp) || prev == window_of.end() || prow == row_of.end()) {
            continue;
        }
        if (!(adjusted.mats[prev->second].diagonal().array() > 0.0).all()) {
            continue;
        }
        keep.push_back(k);
        driver.push_back(dp);
    }
    const auto m = static_cast<Eigen::Index>(keep.size());
    Matrix iv(m, d);
    std::vector<Matrix> controls(static_cast<std::size_t>(d), Matrix(m, 2));
    for (Eigen::Index r = 0; r < m; ++r) {
        const auto k = keep[static_cast<std::size_t>(r)];
        const auto date = adjusted.dates[k];
        iv.row(r) = adjusted.mats[k].diagonal().transpose();
        const auto& prev = adjusted.mats[window_of.at(add_days(date, -week))];
        const auto prow = row_of.at(add_days(date, -week));
        for (Eigen::Index h = 0; h < d; ++h) {
            controls[static_cast<std::size_t>(h)](r, 0) = std::asinh(pbar_hour(prow, h));
            controls[static_cast<std::size_t>(h)](r, 1) = std::log(prev(h, h));
        }
    }
    const Vector drv = to_vec(driver);
    const auto weak = functional_leverage_curves(iv, drv, {}, c.leverage_hac_lags);
    const auto strong = functional_leverage_curves(iv, drv, controls, c.leverage_hac_lags);
    auto out = open_out(dir / "leverage_curves.csv");
    out << "form,hour,beta_plus,se_plus,beta_minus,se_minus,wald_p,asymmetric\n";
    for (const auto* curves : {&weak, &strong}) {
        for (Eigen::Index h = 0; h < d; ++h) {
            out << (curves->conditional ? "conditional" : "unconditional") << ','
                << labels[static_cast<std::size_t>(h)] << ',' << format_number(curves->beta_plus(h)) << ','
                << format_number(curves->se_plus(h)) << ',' << format_number(curves->beta_minus(h)) << ','
                << format_number(curves->se_minus(h)) << ',' << format_number(curves->wald_p(h)) << ','
                << (curves->asymmetric[static_cast<std::size_t>(h)] ? 1 : 0) << '\n';
        }
    }
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(fmt::format("config is not valid JSON: {}", e.what()));
    }
    check_keys(doc, {"inputs", "simulation", "partition", "fine_grid", "detrend", "semigroup", "rcv", "factor", "stats",
                     "output_dir"},
               "config");
    PipelineConfig c;
    if (doc.contains("partition")) {
        c.partition = parse_partition(doc.at("partition"));
    }
    read_opt(doc, "fine_grid", c.fine_grid, "config");
    if (doc.contains("inputs")) {
        for (const auto& in : doc.at("inputs")) {
            c.inputs.push_back(parse_input(in));
        }
    }
    if (doc.contains("simulation")) {
        c.simulation = parse_simulation(doc.at("simulation"));
        c.simulation->partition = c.partition;
    }
    if (doc.contains("detrend")) {
        const auto& o = doc.at("detrend");
        check_keys(o, {"bandwidth_days", "dow_dummies"}, "detrend");
        read_opt(o, "bandwidth_days", c.detrend.bandwidth_days, "detrend");
        read_opt(o, "dow_dummies", c.detrend.dow_dummies, "detrend");
    }
    if (doc.contains("semigroup")) {
        const auto& o = doc.at("semigroup");
        check_keys(o, {"refit_days", "burn_in_days", "ridge", "auto_ridge"}, "semigroup");
        read_opt(o, "refit_days", c.refit_days, "semigroup");
        read_opt(o, "burn_in_days", c.burn_in_days, "semigroup");
        read_opt(o, "ridge", c.semigroup.ridge, "semigroup");
        read_opt(o, "auto_ridge", c.semigroup.auto_ridge, "semigroup");
    }
    if (doc.contains("rcv")) {
        const auto& o = doc.at("rcv");
        check_keys(o, {"window", "delta", "rolling"}, "rcv");
        read_opt(o, "window", c.rcv.window, "rcv");
        read_opt(o, "delta", c.rcv.delta, "rcv");
        read_opt(o, "rolling", c.rcv.rolling, "rcv");
    }
    if (doc.contains("factor")) {
        const auto& o = doc.at("factor");
        check_keys(o, {"components", "explained_threshold"}, "factor");
        read_opt(o, "components", c.factor_components, "factor");
        read_opt(o, "explained_threshold", c.explained_threshold, "factor");
    }
    if (doc.contains("stats")) {
        const auto& o = doc.at("stats");
        check_keys(o, {"nic_specs", "nic_bins", "nic_hac_lags", "leverage_hac_lags", "stationarity", "kpss_null",
                       "kpss_lags", "adf_max_lags", "adf_spec"},
                   "stats");
        read_opt(o, "nic_specs", c.nic_specs, "stats");
        read_opt(o, "nic_bins", c.nic_bins, "stats");
        read_opt(o, "nic_hac_lags", c.nic_hac_lags, "stats");
        read_opt(o, "leverage_hac_lags", c.leverage_hac_lags, "stats");
        read_opt(o, "stationarity", c.stationarity, "stats");
        read_opt(o, "kpss_lags", c.kpss_lags, "stats");
        read_opt(o, "adf_max_lags", c.adf_max_lags, "stats");
        if (o.contains("kpss_null")) {
            c.kpss_null = parse_kpss_null(o.at("kpss_null").get<std::string>());
        }
        if (o.contains("adf_spec")) {
            c.adf_spec = parse_adf_spec(o.at("adf_spec").get<std::string>());
        }
    }
    if (doc.contains("output_dir")) {
        c.output_dir = doc.at("output_dir").get<std::string>();
    }
    validate(c);
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(fmt::format("cannot read config {}", path.string()));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pipeline_config(ss.str());
}

std::string pipeline_config_json(const PipelineConfig& c) {
    json doc;
    json inputs = json::array();
    for (const auto& in : c.inputs) {
        inputs.push_back({{"zone", in.zone},
                          {"csv", in.csv.generic_string()},
                          {"timestamp_column", in.schema.timestamp_column},
                          {"zone_column", in.schema.zone_column},
                          {"price_column", in.schema.price_column},
                          {"source_timezone", in.schema.source_timezone},
                          {"timezone", in.timezone},
                          {"dst_policy", in.dst_policy == DstPolicy::Repair ? "repair" : "reject"}});
    }
    doc["inputs"] = std::move(inputs);
    doc["partition"] = {{"breakpoints", std::vector<double>(c.partition.breakpoints().begin(),
                                                            c.partition.breakpoints().end())},
                        {"labels", c.partition.labels()}};
    doc["fine_grid"] = c.fine_grid;
    if (c.simulation) {
        const auto& s = *c.simulation;
        json segs = json::array();
        for (const auto& seg : s.vol_segments) {
            segs.push_back({{"start_day", seg.start_day}, {"factor", seg.factor}});
        }
        doc["simulation"] = {{"modes", s.modes},
                             {"kappa", s.kappa},
                             {"zero_mode_lambda", s.zero_mode_lambda},
                             {"mode_sigma", s.mode_sigma},
                             {"vol_model", vol_model_name(s.vol_model)},
                             {"vol_segments", segs},
                             {"sqrt_factor", {{"theta", s.sqrt_factor.theta}, {"xi", s.sqrt_factor.xi},
                                              {"v0", s.sqrt_factor.v0}}},
                             {"drift", {{"level", s.drift.level}, {"trend_per_day", s.drift.trend_per_day},
                                        {"weekly", std::vector<double>(s.drift.weekly.begin(), s.drift.weekly.end())}}},
                             {"days", s.days},
                             {"substeps", s.substeps},
                             {"delta", s.delta},
                             {"seed", s.seed},
                             {"start", format_date(s.start)},
                             {"stationary_start", s.stationary_start}};
    }
    doc["detrend"] = {{"bandwidth_days", c.detrend.bandwidth_days}, {"dow_dummies", c.detrend.dow_dummies}};
    doc["semigroup"] = {{"refit_days", c.refit_days},
                        {"burn_in_days", c.burn_in_days},
                        {"ridge", c.semigroup.ridge},
                        {"auto_ridge", c.semigroup.auto_ridge}};
    doc["rcv"] = {{"window", c.rcv.window}, {"delta", c.rcv.delta}, {"rolling", c.rcv.rolling}};
    doc["factor"] = {{"components", c.factor_components}, {"explained_threshold", c.explained_threshold}};
    doc["stats"] = {{"nic_specs", c.nic_specs},
                    {"nic_bins", c.nic_bins},
                    {"nic_hac_lags", c.nic_hac_lags},
                    {"leverage_hac_lags", c.leverage_hac_lags},
                    {"stationarity", c.stationarity},
                    {"kpss_null", c.kpss_null == KpssNull::Level ? "level" : "trend"},
                    {"kpss_lags", c.kpss_lags},
                    {"adf_max_lags", c.adf_max_lags},
                    {"adf_spec", to_string(c.adf_spec)}};
    return doc.dump(2);
}

std::string config_hash(const PipelineConfig& config) {
    return fmt::format("{:016x}", fnv1a(pipeline_config_json(config)));
}

std::string to_string(Stage stage) {
    switch (stage) {
    case Stage::Ingest:
        return "ingest";
    case Stage::Simulate:
        return "simulate";
    case Stage::Detrend:
        return "detrend";
    case Stage::Semigroup:
        return "semigroup";
    case Stage::Rcv:
        return "rcv";
    case Stage::Factors:
        return "factors";
    case Stage::Stats:
        return "stats";
    }
    return "unknown";
}

std::vector<std::string> pipeline_zones(const PipelineConfig& config) {
    std::vector<std::string> zones;
    for (const auto& in : config.inputs) {
        zones.push_back(in.zone);
    }
    if (config.simulation) {
        zones.emplace_back(kSimZone);
    }
    return zones;
}

void run_stage(const PipelineConfig& config, Stage stage, const std::string& zone) {
    const auto dir = zone_dir(config, zone);
    try {
        fs::create_directories(dir);
        switch (stage) {
        case Stage::Ingest: {
            if (zone == kSimZone) {
                stage_simulate(config, dir);
                break;
            }
            const auto it = std::find_if(config.inputs.begin(), config.inputs.end(),
                                         [&](const InputSpec& in) { return in.zone == zone; });
            if (it == config.inputs.end()) {
                throw Error(fmt::format("no input configured for zone '{}'", zone));
            }
            stage_ingest(config, *it, dir);
            break;
        }
        case Stage::Simulate:
            if (!config.simulation) {
                throw Error("the configuration has no 'simulation' section");
            }
            stage_simulate(config, dir);
            break;
        case Stage::Detrend:
            stage_detrend(config, dir);
            break;
        case Stage::Semigroup:
            stage_semigroup(config, dir);
            break;
        case Stage::Rcv:
            stage_rcv(config, dir);
            break;
        case Stage::Factors:
            stage_factors(config, dir);
            break;
        case Stage::Stats:
            stage_stats(config, dir);
            break;
        }
    } catch (const std::exception& e) {
        throw Error(fmt::format("[stage {}] zone {}: {}", to_string(stage), zone, e.what()));
    }
}

void write_manifest(const PipelineConfig& config) {
    json doc;
    doc["config_hash"] = config_hash(config);
    doc["config"] = json::parse(pipeline_config_json(config));
    json zones = json::array();
    for (const auto& zone : pipeline_zones(config)) {
        std::vector<std::string> files;
        const auto dir = zone_dir(config, zone);
        if (fs::exists(dir)) {
            for (const auto& entry : fs::directory_iterator(dir)) {
                files.push_back(entry.path().filename().string());
            }
        }
        std::sort(files.begin(), files.end());
        zones.push_back({{"zone", zone}, {"directory", zone}, {"files", files}});
    }
    doc["zones"] = std::move(zones);
    fs::create_directories(config.output_dir);
    write_text(config.output_dir / "manifest.json", doc.dump(2));
}

void run_pipeline(const PipelineConfig& config) {
    for (const auto& zone : pipeline_zones(config)) {
        for (auto stage : {Stage::Ingest, Stage::Detrend, Stage::Semigroup, Stage::Rcv, Stage::Factors, Stage::Stats}) {
            run_stage(config, stage, zone);
        }
    }
    write_manifest(config);
}

} // namespace elvol
