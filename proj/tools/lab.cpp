// lab <kind> --config <path> [--out <dir>] [--seed <u64>] [--fixed-clock]
// Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 bad usage or config, 3 output error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ellab/io/config.hpp"
#include "ellab/io/export.hpp"
#include "ellab/io/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Experiment runner for the singularly perturbed elliptic problem and its parabolic limit"};
    std::string kind, config_path, out_dir;
    std::uint64_t seed = 0;
    bool fixed_clock = false;
    app.add_option("kind", kind, "Experiment kind")
        ->required()
        ->check(CLI::IsMember(ellab::io::experiment_kinds()));
    app.add_option("--config", config_path, "JSON configuration")->required();
    app.add_option("--out", out_dir, "Output directory (default: config output_dir, else out/<kind>)");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed overriding the config");
    app.add_flag("--fixed-clock", fixed_clock, "Zero the wall clock and timestamp for byte-stable reports");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // --help exits cleanly
    }

    ellab::io::ExperimentConfig cfg;
    try {
        cfg = ellab::io::load_config(config_path);
        if (cfg.kind != kind) {
            ellab::fail(ellab::ErrorCode::ValidationError, "kind: config declares '" + cfg.kind + "' but '" + kind + "' was requested");
        }
    } catch (const ellab::Error& e) {
        std::cerr << "lab: " << ellab::to_string(e.code()) << ": " << e.what() << "\n";
        return 2;
    }

    ellab::io::RunOptions opts;
    opts.fixed_clock = fixed_clock;
    if (*seed_opt) opts.seed = seed;
    const ellab::io::Report report = ellab::io::run(cfg, opts);

    if (out_dir.empty()) out_dir = cfg.output_dir.empty() ? "out/" + kind : cfg.output_dir;
    try {
        ellab::io::export_report(report, out_dir);
    } catch (const ellab::Error& e) {
        std::cerr << "lab: " << ellab::to_string(e.code()) << ": " << e.what() << "\n";
        return 3;
    }
    for (const auto& v : report.verdicts) {
        std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << "  value=" << v.value << " " << v.comparator << " "
                  << v.threshold << "  [" << v.table << " row " << v.row << "]";
        if (!v.detail.empty()) std::cout << "  " << v.detail;
        std::cout << "\n";
    }
    std::cout << (report.all_pass() ? "all verdicts pass" : "some verdicts failed") << "; report in " << out_dir << "\n";
    return report.all_pass() ? 0 : 1;
}
