#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ellab/io/config.hpp"
#include "ellab/io/export.hpp"
#include "ellab/io/field_io.hpp"
#include "ellab/io/runner.hpp"

using namespace ellab;
using namespace ellab::io;
namespace fs = std::filesystem;

namespace {

struct Failure {
    ErrorCode code;
    std::string message;
};

template <class Fn>
Failure failure_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return {e.code(), e.what()};
    }
    ADD_FAILURE() << "expected an ellab::Error";
    return {ErrorCode::InvalidArgument, ""};
}

fs::path scratch_dir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    const fs::path d = fs::temp_directory_path() / "ellab_tests" / (std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string config_path(const std::string& name) { return std::string(ELLAB_CONFIG_DIR) + "/" + name; }

const std::string kSynthetic = R"({
  "schema_version": 1,
  "kind": "converge",
  "study": "synthetic",
  "eps_list": [0.2, 0.1, 0.05, 0.025],
  "params": {"synthetic_exponent": 0.5, "min_slope": 0.45, "max_log_residual": 0.3}
})";

} // namespace

TEST(Config, ParsesTheShippedConfigs) {
    int count = 0;
    for (const auto& e : fs::directory_iterator(ELLAB_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW((void)load_config(e.path().string())) << e.path();
        ++count;
    }
    EXPECT_GE(count, 13);
}

TEST(Config, UnknownTopLevelKeyIsRejected) {
    std::string text = kSynthetic;
    text.replace(text.find("\"eps_list\""), 10, "\"epz_list\"");
    const Failure f = failure_of([&] { (void)parse_config(text); });
    EXPECT_EQ(f.code, ErrorCode::ValidationError);
    EXPECT_NE(f.message.find("epz_list"), std::string::npos) << f.message;
}

TEST(Config, EpsListMustBeDescending) {
    std::string text = kSynthetic;
    text.replace(text.find("[0.2, 0.1, 0.05, 0.025]"), 23, "[0.1, 0.2, 0.05, 0.025]");
    const Failure f = failure_of([&] { (void)parse_config(text); });
    EXPECT_EQ(f.code, ErrorCode::ValidationError);
    EXPECT_NE(f.message.find("eps_list"), std::string::npos) << f.message;
    std::string big = kSynthetic;
    big.replace(big.find("[0.2, 0.1, 0.05, 0.025]"), 23, "[2.0, 0.1, 0.05]");
    EXPECT_EQ(failure_of([&] { (void)parse_config(big); }).code, ErrorCode::ValidationError);
}

TEST(Config, SyntaxErrorsCarryLineAndColumn) {
    const std::string text = "{\n  \"schema_version\": 1,\n  \"kind\": ,\n}";
    const Failure f = failure_of([&] { (void)parse_config(text); });
    EXPECT_EQ(f.code, ErrorCode::ParseError);
    EXPECT_NE(f.message.find("line 3, column 11"), std::string::npos) << f.message;
}

TEST(Config, NestedPathsAreReported) {
    const std::string text = R"({"schema_version": 1, "kind": "equilibria",
      "problem": {"nonlinearity": {"id": "chafee_infante", "lamda": 2.0}}})";
    const Failure f = failure_of([&] { (void)parse_config(text); });
    EXPECT_EQ(f.code, ErrorCode::ValidationError);
    EXPECT_NE(f.message.find("problem.nonlinearity.lamda"), std::string::npos) << f.message;
}

TEST(Config, TypeMismatchNamesTheField) {
    const std::string text = R"({"schema_version": 1, "kind": "equilibria", "problem": {"n_interior": "many"}})";
    const Failure f = failure_of([&] { (void)parse_config(text); });
    EXPECT_EQ(f.code, ErrorCode::ValidationError);
    EXPECT_NE(f.message.find("problem.n_interior"), std::string::npos) << f.message;
}

TEST(Config, ParamsAreCheckedPerStudy) {
    const std::string text = R"({"schema_version": 1, "kind": "equilibria", "study": "census",
      "params": {"deltas": [0.1, 0.01]}})";
    const Failure f = failure_of([&] { (void)parse_config(text); });
    EXPECT_EQ(f.code, ErrorCode::ValidationError);
    EXPECT_NE(f.message.find("params.deltas"), std::string::npos) << f.message;
    const std::string bad_study = R"({"schema_version": 1, "kind": "equilibria", "study": "modal"})";
    EXPECT_NE(failure_of([&] { (void)parse_config(bad_study); }).message.find("study"), std::string::npos);
}

TEST(Config, LengthAcceptsPi) {
    const auto cfg = parse_config(R"({"schema_version": 1, "kind": "equilibria", "problem": {"length": "pi"}})");
    EXPECT_DOUBLE_EQ(cfg.problem.length, std::numbers::pi);
    EXPECT_EQ(cfg.study, "census");
}

TEST(Config, MissingFileIsAnIoError) {
    EXPECT_EQ(failure_of([] { (void)load_config("/nonexistent/config.json"); }).code, ErrorCode::IoError);
}

TEST(FieldCsv, RoundTripIsExact) {
    const fs::path d = scratch_dir();
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    const SpatialGrid g(std::numbers::pi, 33);
    Field f = Field::zero(g, 2);
    for (int j = 0; j < 33; ++j)
        for (int c = 0; c < 2; ++c) f(j, c) = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 20);
    save_field(f, (d / "f.csv").string());
    const Field back = load_field((d / "f.csv").string(), g);
    EXPECT_EQ(back.values(), f.values());
    const Field inferred = load_field((d / "f.csv").string());
    EXPECT_EQ(inferred.values(), f.values());
    EXPECT_NEAR(inferred.grid().length(), std::numbers::pi, 1e-13);
    EXPECT_EQ(read_file(d / "f.csv").substr(0, 8), "x,c0,c1\n");
}

TEST(FieldCsv, MalformedFilesAreFormatErrors) {
    const fs::path d = scratch_dir();
    write_file(d / "empty.csv", "");
    EXPECT_EQ(failure_of([&] { (void)load_field((d / "empty.csv").string()); }).code, ErrorCode::FormatError);
    write_file(d / "cols.csv", "x,c0\n0.5,1.0\n1.0,2.0,3.0\n");
    const Failure cols = failure_of([&] { (void)load_field((d / "cols.csv").string()); });
    EXPECT_EQ(cols.code, ErrorCode::FormatError);
    EXPECT_NE(cols.message.find("line 3"), std::string::npos) << cols.message;
    write_file(d / "header.csv", "t,c0\n0.5,1.0\n");
    EXPECT_EQ(failure_of([&] { (void)load_field((d / "header.csv").string()); }).code, ErrorCode::FormatError);
    write_file(d / "nan.csv", "x,c0\n0.5,nan\n1.0,2.0\n");
    EXPECT_EQ(failure_of([&] { (void)load_field((d / "nan.csv").string()); }).code, ErrorCode::FormatError);
    write_file(d / "text.csv", "x,c0\n0.5,abc\n");
    EXPECT_EQ(failure_of([&] { (void)load_field((d / "text.csv").string()); }).code, ErrorCode::FormatError);
    write_file(d / "rows.csv", "x,c0\n");
    EXPECT_EQ(failure_of([&] { (void)load_field((d / "rows.csv").string()); }).code, ErrorCode::FormatError);
    save_field(Field::sine_mode(SpatialGrid(1.0, 9), 1), (d / "grid.csv").string());
    EXPECT_EQ(failure_of([&] { (void)load_field((d / "grid.csv").string(), SpatialGrid(1.0, 10)); }).code,
              ErrorCode::FormatError);
    EXPECT_EQ(failure_of([&] { (void)load_field((d / "missing.csv").string()); }).code, ErrorCode::IoError);
}

TEST(Export, WritesReportCsvAndPlotPerRateTable) {
    const fs::path d = scratch_dir();
    const Report r = run(parse_config(kSynthetic), {std::nullopt, true});
    const auto files = export_report(r, d);
    ASSERT_EQ(files.size(), 3u);
    EXPECT_TRUE(fs::exists(d / "report.json"));
    EXPECT_TRUE(fs::exists(d / "rate.csv"));
    EXPECT_TRUE(fs::exists(d / "rate.plots.svg"));
    const auto j = nlohmann::json::parse(read_file(d / "report.json"));
    EXPECT_EQ(j["kind"], "converge");
    EXPECT_TRUE(j["all_pass"].get<bool>());
    EXPECT_EQ(j["tables"][0]["fit"]["x"], "eps");
    const std::string csv = read_file(d / "rate.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "eps,distance");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(Export, TablesWithoutFitGetNoPlot) {
    const fs::path d = scratch_dir();
    Report r;
    r.kind = "equilibria";
    Table& t = r.add_table("plain table", {"a", "b"});
    t.add_row({1.0, std::string("x,y")});
    const auto files = export_report(r, d);
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(files[1].filename().string(), "plain_table.csv");
    EXPECT_EQ(read_file(files[1]), "a,b\n1,\"x,y\"\n");
    Report empty;
    const fs::path d2 = d / "empty";
    EXPECT_EQ(export_report(empty, d2).size(), 1u);
    const auto j = nlohmann::json::parse(read_file(d2 / "report.json"));
    EXPECT_FALSE(j["all_pass"].get<bool>());
}

TEST(Export, UnwritableDirectoryIsAnIoError) {
    const fs::path d = scratch_dir();
    write_file(d / "file", "occupied");
    EXPECT_EQ(failure_of([&] { (void)export_report(Report{}, d / "file" / "sub"); }).code, ErrorCode::IoError);
}

TEST(Svg, FitLineEndpointsMatchTheLayout) {
    Table t;
    t.name = "rate";
    t.columns = {"eps", "d"};
    const std::vector<double> e{0.4, 0.2, 0.1, 0.05}, d{0.9, 0.5, 0.2, 0.13};
    for (size_t i = 0; i < e.size(); ++i) t.add_row({e[i], d[i]});
    t.x_column = "eps";
    t.y_column = "d";
    t.fit = rate_fit(e, d);
    const std::string svg = render_rate_svg(t);
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex(R"(id="fit" d="M ([-\d.]+) ([-\d.]+) L ([-\d.]+) ([-\d.]+)\")")));
    // independent recomputation of the log-log layout
    const double lx0 = std::log(0.05), lx1 = std::log(0.4);
    const double f0 = t.fit->slope * lx0 + t.fit->intercept, f1 = t.fit->slope * lx1 + t.fit->intercept;
    double ly0 = std::min(f0, f1), ly1 = std::max(f0, f1);
    for (double v : d) {
        ly0 = std::min(ly0, std::log(v));
        ly1 = std::max(ly1, std::log(v));
    }
    auto px = [&](double v) { return 64.0 + (v - lx0) / (lx1 - lx0) * (640.0 - 128.0); };
    auto py = [&](double v) { return 64.0 + (ly1 - v) / (ly1 - ly0) * (480.0 - 128.0); };
    EXPECT_NEAR(std::stod(m[1]), px(lx0), 0.5);
    EXPECT_NEAR(std::stod(m[2]), py(f0), 0.5);
    EXPECT_NEAR(std::stod(m[3]), px(lx1), 0.5);
    EXPECT_NEAR(std::stod(m[4]), py(f1), 0.5);
    int points = 0;
    for (size_t at = svg.find("class=\"point\""); at != std::string::npos; at = svg.find("class=\"point\"", at + 1)) ++points;
    EXPECT_EQ(points, 4);
}

TEST(Run, SyntheticRateRecoversItsExponent) {
    const Report r = run(parse_config(kSynthetic));
    const Table* t = r.find_table("rate");
    ASSERT_NE(t, nullptr);
    ASSERT_TRUE(t->fit.has_value());
    EXPECT_NEAR(t->fit->slope, 0.5, 1e-12);
    EXPECT_TRUE(r.all_pass());
}

TEST(Run, EquilibriaCensusAtLambdaTwo) {
    const Report r = run(load_config(config_path("c13_determinism.json")));
    const Table* t = r.find_table("equilibria");
    ASSERT_NE(t, nullptr);
    ASSERT_EQ(t->rows.size(), 3u);
    const auto idx = t->numeric_column("index");
    EXPECT_EQ(idx, (std::vector<double>{1, 0, 0}));
    EXPECT_TRUE(r.all_pass());
}

TEST(Run, ModalStudyMatchesTheDecayingExponential) {
    const Report r = run(load_config(config_path("c02_modal.json")));
    const Table* t = r.find_table("modal");
    ASSERT_NE(t, nullptr);
    for (double e : t->numeric_column("slice_error")) EXPECT_LE(e, 0.01);
    EXPECT_TRUE(r.all_pass());
}

TEST(Run, ModuleErrorsBecomeFailedVerdicts) {
    const std::string text = R"({"schema_version": 1, "kind": "solve-elliptic", "study": "modal",
      "problem": {"nonlinearity": {"id": "chafee_infante", "lambda": 1.0}, "n_interior": 16}})";
    const Report r = run(parse_config(text));
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0].name, "completed");
    EXPECT_FALSE(r.verdicts[0].pass);
    const Table* t = r.find_table("errors");
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(std::get<std::string>(t->rows[0][1]), "InvalidArgument");
    EXPECT_FALSE(r.all_pass());
}

TEST(Run, FixedClockReportsAreByteIdentical) {
    const auto cfg = load_config(config_path("c13_determinism.json"));
    const std::string a = report_to_json(run(cfg, {std::nullopt, true})).dump(2);
    const std::string b = report_to_json(run(cfg, {std::nullopt, true})).dump(2);
    EXPECT_EQ(a, b);
    const std::string c = report_to_json(run(cfg, {std::uint64_t{99}, true})).dump(2);
    EXPECT_NE(c.find("\"seed\": 99"), std::string::npos);
}

TEST(Run, EveryVerdictPointsAtAnExistingRow) {
    for (const char* name : {"c01_cross_oracle.json", "c04_census.json", "c11_regularity.json", "c12_symbol.json",
                             "synthetic_rate.json"}) {
        const Report r = run(load_config(config_path(name)));
        ASSERT_FALSE(r.verdicts.empty()) << name;
        for (const auto& v : r.verdicts) {
            const Table* t = r.find_table(v.table);
            ASSERT_NE(t, nullptr) << name << ": " << v.name;
            EXPECT_LT(v.row, t->rows.size()) << name << ": " << v.name;
        }
        EXPECT_TRUE(r.all_pass()) << name;
    }
}

namespace {

int run_lab(const std::string& args) {
    const int status = std::system((std::string(LAB_BINARY) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Cli, ExitCodesFollowTheVerdicts) {
    const fs::path d = scratch_dir();
    write_file(d / "pass.json", kSynthetic);
    std::string failing = kSynthetic;
    failing.replace(failing.find("\"min_slope\": 0.45"), 17, "\"min_slope\": 0.90");
    write_file(d / "fail.json", failing);
    write_file(d / "broken.json", "{\"schema_version\": 1,");
    const std::string out = " --fixed-clock --out " + (d / "out").string();
    EXPECT_EQ(run_lab("converge --config " + (d / "pass.json").string() + out), 0);
    EXPECT_TRUE(fs::exists(d / "out" / "report.json"));
    EXPECT_EQ(run_lab("converge --config " + (d / "fail.json").string() + out), 1);
    EXPECT_EQ(run_lab("converge --config " + (d / "broken.json").string() + out), 2);
    EXPECT_EQ(run_lab("equilibria --config " + (d / "pass.json").string() + out), 2);  // kind mismatch
    EXPECT_EQ(run_lab("nonsense --config " + (d / "pass.json").string()), 2);
    EXPECT_EQ(run_lab("converge"), 2);  // --config is required
}

TEST(Cli, FixedClockOutputIsByteStable) {
    const fs::path d = scratch_dir();
    const std::string cfg = config_path("c13_determinism.json");
    ASSERT_EQ(run_lab("equilibria --config " + cfg + " --fixed-clock --out " + (d / "a").string()), 0);
    ASSERT_EQ(run_lab("equilibria --config " + cfg + " --fixed-clock --out " + (d / "b").string()), 0);
    EXPECT_EQ(read_file(d / "a" / "report.json"), read_file(d / "b" / "report.json"));
}
