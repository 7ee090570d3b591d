// Runs every acceptance configuration and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ellab/io/config.hpp"
#include "ellab/io/export.hpp"
#include "ellab/io/runner.hpp"

namespace fs = std::filesystem;
using namespace ellab::io;

namespace {

struct Criterion {
    int id;
    const char* config;
    const char* what;
};

const std::vector<Criterion> kCriteria{
    {1, "c01_cross_oracle.json", "space-time solve agrees with an independent dense solve"},
    {2, "c02_modal.json", "single-mode solutions match the decaying exponential"},
    {3, "c03_frechet.json", "linearized process matches difference quotients"},
    {4, "c04_census.json", "equilibrium census matches the bifurcation counts"},
    {5, "c05_lyapunov.json", "Lyapunov function decreases along the limit flow"},
    {6, "c06_heteroclinic.json", "unstable-manifold rays connect distinct equilibria"},
    {7, "c07_converge.json", "trajectories converge to the limit flow as eps shrinks"},
    {8, "c08_periodic.json", "periodic forcing yields a tracked periodic orbit"},
    {9, "c09_attractor_distance.json", "attractor distance shrinks with eps"},
    {10, "c10_averaging.json", "patchwork forcing averages to the limit attractor"},
    {11, "c11_regularity.json", "regularity ratios stay bounded"},
    {12, "c12_symbol.json", "operator symbol matches closed forms"},
    {13, "c13_determinism.json", "fixed-clock reports are byte-identical"},
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string first_failure(const Report& r) {
    for (const auto& v : r.verdicts)
        if (!v.pass) return v.name + " (" + v.table + " row " + std::to_string(v.row) + ")";
    return r.verdicts.empty() ? "no verdicts" : "";
}

} // namespace

int main(int argc, char** argv) {
    const fs::path config_dir = argc > 1 ? fs::path(argv[1]) : fs::path(ELLAB_CONFIG_DIR);
    const fs::path scratch = fs::temp_directory_path() / "ellab_acceptance";
    int failed = 0;
    for (const auto& c : kCriteria) {
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = false;
        std::string note;
        try {
            const ExperimentConfig cfg = load_config((config_dir / c.config).string());
            const Report r = run(cfg, {std::nullopt, c.id == 13});
            pass = r.all_pass();
            if (!pass) note = first_failure(r);
            if (c.id == 13 && pass) {
                fs::remove_all(scratch);
                export_report(r, scratch / "a");
                export_report(run(cfg, {std::nullopt, true}), scratch / "b");
                const std::string a = slurp(scratch / "a" / "report.json");
                pass = !a.empty() && a == slurp(scratch / "b" / "report.json");
                if (!pass) note = "report.json differs between runs";
                fs::remove_all(scratch);
            }
        } catch (const ellab::Error& e) {
            note = std::string(ellab::to_string(e.code())) + ": " + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %2d  %-58s %7.1fs%s%s\n", pass ? "PASS" : "FAIL", c.id, c.what, secs,
                    note.empty() ? "" : "  ", note.c_str());
        std::fflush(stdout);
        if (!pass) ++failed;
    }
    std::printf("%d/%zu criteria pass\n", static_cast<int>(kCriteria.size()) - failed, kCriteria.size());
    return failed == 0 ? 0 : 1;
}
