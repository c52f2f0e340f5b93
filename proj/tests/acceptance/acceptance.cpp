// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.
#include "elvol/validation.hpp"

#include <cstring>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    elvol::ValidationOptions options;
    std::string report_path;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::strcmp(argv[i], "--work-dir") == 0) {
            options.work_dir = argv[i + 1];
        } else if (std::strcmp(argv[i], "--report") == 0) {
            report_path = argv[i + 1];
        } else if (std::strcmp(argv[i], "--only") == 0) {
            options.only.push_back(std::stoi(argv[i + 1]));
        }
    }
    const auto report = elvol::run_validation(options);
    std::cout << elvol::report_text(report) << std::flush;
    if (!report_path.empty()) {
        std::ofstream(report_path) << elvol::report_json(report) << '\n';
    }
    std::size_t passed = 0;
    for (const auto& c : report.criteria) {
        passed += c.passed ? 1 : 0;
    }
    std::cout << passed << "/" << report.criteria.size() << " criteria passed\n";
    return report.all_passed() ? 0 : 1;
}
