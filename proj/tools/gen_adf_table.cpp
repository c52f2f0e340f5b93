// Regenerates core/data/adf_quantiles.csv from the simulated Dickey-Fuller null.
#include "elvol/stationarity.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

int main(int argc, char** argv) {
    CLI::App app{"Simulate Dickey-Fuller t quantiles"};
    std::string out = "adf_quantiles.csv";
    std::size_t sample = 500;
    std::size_t draws = 400000;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--out", out, "Output CSV");
    app.add_option("--sample-size", sample, "Observations per draw");
    app.add_option("--draws", draws, "Draws per specification");
    app.add_option("--threads", threads, "Worker threads");
    CLI11_PARSE(app, argc, argv);

    const auto probs = elvol::adf_table_probabilities();
    std::ofstream file(out);
    file << "spec,probability,quantile\n";
    for (auto spec : {elvol::AdfDeterministic::None, elvol::AdfDeterministic::Constant, elvol::AdfDeterministic::Trend}) {
        std::vector<std::vector<double>> parts(threads);
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < threads; ++k) {
            const std::size_t share = draws / threads + (k < draws % threads ? 1 : 0);
            pool.emplace_back([&, k, share] {
                parts[k] = elvol::simulate_adf_null(spec, sample, share, 0xadf0 + 1000 * static_cast<int>(spec) + k);
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        std::vector<double> all;
        for (auto& p : parts) {
            all.insert(all.end(), p.begin(), p.end());
        }
        std::sort(all.begin(), all.end());
        for (double p : probs) {
            const double pos = p * static_cast<double>(all.size() - 1);
            const auto lo = static_cast<std::size_t>(std::floor(pos));
            const auto hi = std::min(lo + 1, all.size() - 1);
            const double q = all[lo] + (pos - static_cast<double>(lo)) * (all[hi] - all[lo]);
            file << fmt::format("{},{},{:.6f}\n", elvol::to_string(spec), p, q);
        }
        std::cerr << fmt::format("{}: 5% quantile {:.4f}\n", elvol::to_string(spec),
                                 all[static_cast<std::size_t>(0.05 * static_cast<double>(all.size()))]);
    }
    return 0;
}
