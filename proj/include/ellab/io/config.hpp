#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellab/coupling.hpp"
#include "ellab/error.hpp"
#include "ellab/field.hpp"
#include "ellab/forcing.hpp"
#include "ellab/grid.hpp"
#include "ellab/io/field_io.hpp"
#include "ellab/newton.hpp"
#include "ellab/nonlinearity.hpp"

namespace ellab::io {

using json = nlohmann::json;

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"solve-elliptic", "solve-parabolic", "equilibria", "converge",
                                                "attractor",      "average",         "regularity-probe"};
    return kinds;
}

/// Sum of sine modes (mode 0 is a constant), or a profile read from a CSV file.
struct ProfileSpec {
    struct Term {
        int mode = 1;
        double amp = 1.0;
        int component = 0;
    };
    std::vector<Term> terms;
    std::optional<std::string> file;

    static ProfileSpec sine(int mode, double amp) { return ProfileSpec{{{mode, amp, 0}}, std::nullopt}; }
};

struct ForcingSpec {
    std::string type = "zero";  // zero | constant | periodic | quasiperiodic | heteroclinic | patchwork | fast_scaled
    ProfileSpec mean, osc, osc2, g_minus, g_plus;
    double omega = 1.0, omega2 = std::numbers::sqrt2, scale = 1.0;
    std::optional<double> eps;  // fast_scaled: fixed eps instead of the experiment's
    std::shared_ptr<ForcingSpec> g1, g2, inner;
};

struct NonlinearitySpec {
    std::string id = "chafee_infante";  // zero | linear | chafee_infante | coupled_cubic_pair
    double lambda = 1.0;
    double c = 0.0;
    double coupling = 0.0;
};

struct ProblemSpec {
    int k = 1;
    std::vector<std::vector<double>> a;      // empty -> identity
    std::vector<std::vector<double>> gamma;  // empty -> identity
    NonlinearitySpec nonlinearity;
    double length = std::numbers::pi;
    int n_interior = 128;
};

struct SolverSpec {
    std::optional<double> tol_residual;  // default 1e-10 linear, 1e-8 nonlinear
    int max_iters = 50;
    double dt = 0.0;
    double parabolic_dt = 1e-3;
    double margin = 2.0;
    bool warm_start = false;
};

/// Union of every study parameter; each study accepts a subset of the keys.
struct StudyParams {
    ProfileSpec u0 = ProfileSpec::sine(1, 1.0);
    ProfileSpec xi = ProfileSpec::sine(2, 1.0);
    double t_end = 2.0;
    double report_time = 1.0;
    double stride = 0.25;
    double t_len = 0.0;
    int m_steps = 0;
    std::vector<double> deltas{1e-3, 1e-4};
    double ratio_min = 5.0;
    double ratio_max = 20.0;
    double rel_gap_max = 1e-6;
    double slice_err_max = 0.01;
    std::vector<double> lambda_sweep;
    std::vector<int> expected_counts;
    std::vector<std::vector<int>> expected_indices;
    int seed_count = 64;
    double dedup_tol = 1e-4;
    double nu_min = 1e-3;
    int n_trajectories = 20;
    double amplitude = 2.0;
    double lyap_tol = 1e-8;
    double radius = 0.0;
    int n_rays = 16;
    int refine = 0;
    double t_grow = 20.0;
    double endpoint_tol = 1e-3;
    double min_slope = 0.45;
    double max_log_residual = 0.3;
    double max_distance = 5e-2;
    double window = 64.0;
    double avg_tol = 1e-6;
    double spread_max = 2.0;
    double alpha = 1.0;
    double beta = 0.5;
    int xi_points = 100;
    double xi_min = 1e-3;
    double xi_max = 1e3;
    double bracket_lo = 0.2;
    double bracket_hi = 5.0;
    double synthetic_exponent = 0.5;
    double synthetic_scale = 1.0;
};

struct ExperimentConfig {
    int schema_version = 1;
    std::string kind;
    std::string study;
    ProblemSpec problem;
    ForcingSpec forcing;
    std::vector<double> eps_list;
    SolverSpec solver;
    StudyParams params;
    std::string output_dir;
    std::uint64_t seed = 0;
    json raw;  // the parsed document, echoed into reports
};

namespace detail {

inline std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

/// Strict object reader: every lookup marks the key as known; finish()
/// rejects whatever was not asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(ErrorCode::ValidationError, where() + ": expected an object");
    }

    [[nodiscard]] bool has(const std::string& key) {
        known_.insert(key);
        return j_.contains(key);
    }
    [[nodiscard]] const json& at(const std::string& key) {
        known_.insert(key);
        if (!j_.contains(key)) fail(ErrorCode::ValidationError, join_path(path_, key) + ": required key is missing");
        return j_.at(key);
    }
    [[nodiscard]] std::string child(const std::string& key) const { return join_path(path_, key); }

    template <class T>
    void opt(const std::string& key, T& out) {
        if (has(key)) out = read<T>(j_.at(key), child(key));
    }

    void finish(const std::set<std::string>& also_allowed = {}) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!known_.count(it.key()) && !also_allowed.count(it.key())) {
                fail(ErrorCode::ValidationError, join_path(path_, it.key()) + ": unknown key '" + it.key() + "'");
            }
        }
    }

    template <class T>
    static T read(const json& v, const std::string& path) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(ErrorCode::ValidationError, path + ": expected a boolean");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(ErrorCode::ValidationError, path + ": expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(ErrorCode::ValidationError, path + ": expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned()) return v.get<T>();
                if (v.get<long long>() < 0) fail(ErrorCode::ValidationError, path + ": expected a nonnegative integer");
            }
            return v.get<T>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (v.is_string() && v.get<std::string>() == "pi") return std::numbers::pi;
            if (!v.is_number()) fail(ErrorCode::ValidationError, path + ": expected a number");
            const double d = v.get<double>();
            if (!std::isfinite(d)) fail(ErrorCode::ValidationError, path + ": expected a finite number");
            return d;
        } else {
            if (!v.is_array()) fail(ErrorCode::ValidationError, path + ": expected an array");
            T out;
            for (size_t i = 0; i < v.size(); ++i) {
                out.push_back(read<typename T::value_type>(v[i], path + "[" + std::to_string(i) + "]"));
            }
            return out;
        }
    }

private:
    [[nodiscard]] std::string where() const { return path_.empty() ? "<root>" : path_; }

    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

inline ProfileSpec parse_profile(const json& j, const std::string& path) {
    ProfileSpec p;
    if (j.is_object()) {
        ObjectReader r(j, path);
        p.file = ObjectReader::read<std::string>(r.at("file"), r.child("file"));
        r.finish();
        return p;
    }
    if (!j.is_array()) fail(ErrorCode::ValidationError, path + ": expected a list of sine terms or {\"file\": ...}");
    for (size_t i = 0; i < j.size(); ++i) {
        ObjectReader r(j[i], path + "[" + std::to_string(i) + "]");
        ProfileSpec::Term t;
        r.opt("mode", t.mode);
        r.opt("amp", t.amp);
        r.opt("component", t.component);
        r.finish();
        if (t.mode < 0) fail(ErrorCode::ValidationError, r.child("mode") + ": mode must be nonnegative");
        if (t.component < 0) fail(ErrorCode::ValidationError, r.child("component") + ": component must be nonnegative");
        p.terms.push_back(t);
    }
    return p;
}

inline ForcingSpec parse_forcing(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    ForcingSpec f;
    f.type = ObjectReader::read<std::string>(r.at("type"), r.child("type"));
    auto prof = [&](const char* key, ProfileSpec& out, bool required) {
        if (required || r.has(key)) out = parse_profile(r.at(key), r.child(key));
    };
    auto sub = [&](const char* key) {
        return std::make_shared<ForcingSpec>(parse_forcing(r.at(key), r.child(key)));
    };
    if (f.type == "zero") {
    } else if (f.type == "constant") {
        prof("mean", f.mean, true);
    } else if (f.type == "periodic") {
        prof("mean", f.mean, false);
        prof("osc", f.osc, true);
        r.opt("omega", f.omega);
    } else if (f.type == "quasiperiodic") {
        prof("mean", f.mean, false);
        prof("osc", f.osc, true);
        prof("osc2", f.osc2, true);
        r.opt("omega", f.omega);
        r.opt("omega2", f.omega2);
    } else if (f.type == "heteroclinic") {
        prof("g_minus", f.g_minus, true);
        prof("g_plus", f.g_plus, true);
        r.opt("scale", f.scale);
    } else if (f.type == "patchwork") {
        f.g1 = sub("g1");
        f.g2 = sub("g2");
    } else if (f.type == "fast_scaled") {
        f.inner = sub("inner");
        if (r.has("eps")) f.eps = ObjectReader::read<double>(r.at("eps"), r.child("eps"));
    } else {
        fail(ErrorCode::ValidationError, r.child("type") + ": unknown forcing type '" + f.type + "'");
    }
    if (f.omega <= 0.0 || f.omega2 <= 0.0) fail(ErrorCode::ValidationError, path + ": frequencies must be positive");
    if (f.scale <= 0.0) fail(ErrorCode::ValidationError, r.child("scale") + ": must be positive");
    if (f.eps && *f.eps <= 0.0) fail(ErrorCode::ValidationError, r.child("eps") + ": must be positive");
    r.finish();
    return f;
}

inline const std::set<std::string>& study_keys(const std::string& kind, const std::string& study) {
    static const std::set<std::string> none;
    static const std::map<std::string, std::set<std::string>> table{
        {"solve-elliptic/trajectory", {"u0", "t_end", "stride"}},
        {"solve-elliptic/cross_oracle", {"u0", "t_end", "rel_gap_max"}},
        {"solve-elliptic/modal", {"report_time", "t_len", "m_steps", "slice_err_max"}},
        {"solve-elliptic/frechet", {"u0", "xi", "report_time", "deltas", "ratio_min", "ratio_max"}},
        {"solve-parabolic/trajectory", {"u0", "t_end", "stride"}},
        {"solve-parabolic/lyapunov", {"n_trajectories", "amplitude", "t_end", "lyap_tol"}},
        {"equilibria/census", {"lambda_sweep", "expected_counts", "expected_indices", "seed_count", "dedup_tol", "nu_min"}},
        {"converge/trajectory", {"u0", "t_end", "min_slope", "max_log_residual"}},
        {"converge/synthetic", {"synthetic_exponent", "synthetic_scale", "min_slope", "max_log_residual"}},
        {"attractor/distance", {"radius", "n_rays", "refine", "t_grow", "stride", "max_distance", "seed_count", "nu_min"}},
        {"attractor/heteroclinic", {"radius", "n_rays", "t_grow", "stride", "endpoint_tol", "seed_count", "nu_min"}},
        {"attractor/periodic", {"seed_count", "nu_min"}},
        {"average/patchwork", {"radius", "n_rays", "refine", "t_grow", "stride", "window", "avg_tol", "seed_count", "nu_min"}},
        {"regularity-probe/regularity", {"u0", "spread_max"}},
        {"regularity-probe/symbol", {"alpha", "beta", "xi_points", "xi_min", "xi_max", "bracket_lo", "bracket_hi"}},
    };
    const auto it = table.find(kind + "/" + study);
    return it == table.end() ? none : it->second;
}

inline std::string default_study(const std::string& kind) {
    if (kind == "solve-elliptic" || kind == "solve-parabolic" || kind == "converge") return "trajectory";
    if (kind == "equilibria") return "census";
    if (kind == "attractor") return "distance";
    if (kind == "average") return "patchwork";
    return "regularity";
}

inline StudyParams parse_params(const json& j, const std::string& path, const std::string& kind,
                                const std::string& study) {
    StudyParams p;
    ObjectReader r(j, path);
    const auto& allowed = study_keys(kind, study);
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            fail(ErrorCode::ValidationError,
                 r.child(it.key()) + ": unknown key '" + it.key() + "' for study " + kind + "/" + study);
        }
    }
    if (r.has("u0")) p.u0 = parse_profile(r.at("u0"), r.child("u0"));
    if (r.has("xi")) p.xi = parse_profile(r.at("xi"), r.child("xi"));
    r.opt("t_end", p.t_end);
    r.opt("report_time", p.report_time);
    r.opt("stride", p.stride);
    r.opt("t_len", p.t_len);
    r.opt("m_steps", p.m_steps);
    r.opt("deltas", p.deltas);
    r.opt("ratio_min", p.ratio_min);
    r.opt("ratio_max", p.ratio_max);
    r.opt("rel_gap_max", p.rel_gap_max);
    r.opt("slice_err_max", p.slice_err_max);
    r.opt("lambda_sweep", p.lambda_sweep);
    r.opt("expected_counts", p.expected_counts);
    r.opt("expected_indices", p.expected_indices);
    r.opt("seed_count", p.seed_count);
    r.opt("dedup_tol", p.dedup_tol);
    r.opt("nu_min", p.nu_min);
    r.opt("n_trajectories", p.n_trajectories);
    r.opt("amplitude", p.amplitude);
    r.opt("lyap_tol", p.lyap_tol);
    r.opt("radius", p.radius);
    r.opt("n_rays", p.n_rays);
    r.opt("refine", p.refine);
    r.opt("t_grow", p.t_grow);
    r.opt("endpoint_tol", p.endpoint_tol);
    r.opt("min_slope", p.min_slope);
    r.opt("max_log_residual", p.max_log_residual);
    r.opt("max_distance", p.max_distance);
    r.opt("window", p.window);
    r.opt("avg_tol", p.avg_tol);
    r.opt("spread_max", p.spread_max);
    r.opt("alpha", p.alpha);
    r.opt("beta", p.beta);
    r.opt("xi_points", p.xi_points);
    r.opt("xi_min", p.xi_min);
    r.opt("xi_max", p.xi_max);
    r.opt("bracket_lo", p.bracket_lo);
    r.opt("bracket_hi", p.bracket_hi);
    r.opt("synthetic_exponent", p.synthetic_exponent);
    r.opt("synthetic_scale", p.synthetic_scale);
    r.finish();
    auto positive = [&](double v, const char* key) {
        if (!(v > 0.0)) fail(ErrorCode::ValidationError, r.child(key) + ": must be positive");
    };
    positive(p.t_end, "t_end");
    positive(p.stride, "stride");
    positive(p.t_grow, "t_grow");
    positive(p.window, "window");
    positive(p.endpoint_tol, "endpoint_tol");
    if (p.refine < 0) fail(ErrorCode::ValidationError, r.child("refine") + ": must be nonnegative");
    if (p.n_rays < 1) fail(ErrorCode::ValidationError, r.child("n_rays") + ": must be positive");
    if (p.n_trajectories < 1) fail(ErrorCode::ValidationError, r.child("n_trajectories") + ": must be positive");
    if (p.seed_count < 0) fail(ErrorCode::ValidationError, r.child("seed_count") + ": must be nonnegative");
    if (p.xi_points < 2) fail(ErrorCode::ValidationError, r.child("xi_points") + ": needs at least 2 points");
    if (!(p.xi_min > 0.0 && p.xi_max > p.xi_min)) fail(ErrorCode::ValidationError, r.child("xi_max") + ": needs 0 < xi_min < xi_max");
    if (!p.expected_counts.empty() && p.expected_counts.size() != p.lambda_sweep.size()) {
        fail(ErrorCode::ValidationError, r.child("expected_counts") + ": length must match lambda_sweep");
    }
    if (!p.expected_indices.empty() && p.expected_indices.size() != p.lambda_sweep.size()) {
        fail(ErrorCode::ValidationError, r.child("expected_indices") + ": length must match lambda_sweep");
    }
    for (size_t i = 0; i < p.deltas.size(); ++i) {
        if (!(p.deltas[i] > 0.0)) fail(ErrorCode::ValidationError, r.child("deltas") + ": entries must be positive");
    }
    return p;
}

inline std::vector<std::vector<double>> parse_matrix(const json& j, const std::string& path, int k) {
    auto m = ObjectReader::read<std::vector<std::vector<double>>>(j, path);
    if (static_cast<int>(m.size()) != k) fail(ErrorCode::ValidationError, path + ": expected " + std::to_string(k) + " rows");
    for (size_t i = 0; i < m.size(); ++i) {
        if (static_cast<int>(m[i].size()) != k) {
            fail(ErrorCode::ValidationError, path + "[" + std::to_string(i) + "]: expected " + std::to_string(k) + " entries");
        }
    }
    return m;
}

/// 1-based line and column of a byte offset.
inline std::pair<size_t, size_t> line_column(const std::string& text, size_t byte) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

/// Parses and validates a configuration document.
inline ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // e.byte points one past the offending character
        const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        fail(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
    }
    ExperimentConfig cfg;
    cfg.raw = doc;
    detail::ObjectReader r(doc, "");
    cfg.schema_version = detail::ObjectReader::read<int>(r.at("schema_version"), "schema_version");
    if (cfg.schema_version != 1) fail(ErrorCode::ValidationError, "schema_version: unsupported version");
    cfg.kind = detail::ObjectReader::read<std::string>(r.at("kind"), "kind");
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end()) {
        fail(ErrorCode::ValidationError, "kind: unknown experiment kind '" + cfg.kind + "'");
    }
    cfg.study = detail::default_study(cfg.kind);
    r.opt("study", cfg.study);
    if (detail::study_keys(cfg.kind, cfg.study).empty()) {
        fail(ErrorCode::ValidationError, "study: unknown study '" + cfg.study + "' for kind " + cfg.kind);
    }

    if (r.has("problem")) {
        detail::ObjectReader p(r.at("problem"), "problem");
        p.opt("k", cfg.problem.k);
        if (cfg.problem.k < 1) fail(ErrorCode::ValidationError, "problem.k: must be positive");
        if (p.has("a")) cfg.problem.a = detail::parse_matrix(p.at("a"), "problem.a", cfg.problem.k);
        if (p.has("gamma")) cfg.problem.gamma = detail::parse_matrix(p.at("gamma"), "problem.gamma", cfg.problem.k);
        if (p.has("nonlinearity")) {
            detail::ObjectReader n(p.at("nonlinearity"), "problem.nonlinearity");
            cfg.problem.nonlinearity.id = detail::ObjectReader::read<std::string>(n.at("id"), "problem.nonlinearity.id");
            const std::string& id = cfg.problem.nonlinearity.id;
            if (id == "linear") {
                n.opt("c", cfg.problem.nonlinearity.c);
            } else if (id == "chafee_infante") {
                n.opt("lambda", cfg.problem.nonlinearity.lambda);
            } else if (id == "coupled_cubic_pair") {
                n.opt("lambda", cfg.problem.nonlinearity.lambda);
                n.opt("coupling", cfg.problem.nonlinearity.coupling);
                if (cfg.problem.k != 2) fail(ErrorCode::ValidationError, "problem.nonlinearity.id: coupled_cubic_pair needs k = 2");
            } else if (id != "zero") {
                fail(ErrorCode::ValidationError, "problem.nonlinearity.id: unknown nonlinearity '" + id + "'");
            }
            n.finish();
        }
        p.opt("length", cfg.problem.length);
        p.opt("n_interior", cfg.problem.n_interior);
        if (!(cfg.problem.length > 0.0)) fail(ErrorCode::ValidationError, "problem.length: must be positive");
        if (cfg.problem.n_interior < 3) fail(ErrorCode::ValidationError, "problem.n_interior: needs at least 3 nodes");
        p.finish();
    }
    if (r.has("forcing")) cfg.forcing = detail::parse_forcing(r.at("forcing"), "forcing");
    r.opt("eps_list", cfg.eps_list);
    for (size_t i = 0; i < cfg.eps_list.size(); ++i) {
        const double e = cfg.eps_list[i];
        if (e < 0.0 || e > kEpsMax) {
            fail(ErrorCode::ValidationError, "eps_list[" + std::to_string(i) + "]: outside [0, eps_max]");
        }
        if (i > 0 && !(e < cfg.eps_list[i - 1])) {
            fail(ErrorCode::ValidationError, "eps_list[" + std::to_string(i) + "]: eps_list must be sorted descending");
        }
    }
    if (r.has("solver")) {
        detail::ObjectReader s(r.at("solver"), "solver");
        if (s.has("tol_residual")) cfg.solver.tol_residual = detail::ObjectReader::read<double>(s.at("tol_residual"), "solver.tol_residual");
        s.opt("max_iters", cfg.solver.max_iters);
        s.opt("dt", cfg.solver.dt);
        s.opt("parabolic_dt", cfg.solver.parabolic_dt);
        s.opt("margin", cfg.solver.margin);
        s.opt("warm_start", cfg.solver.warm_start);
        s.finish();
        if (cfg.solver.tol_residual && !(*cfg.solver.tol_residual > 0.0)) fail(ErrorCode::ValidationError, "solver.tol_residual: must be positive");
        if (cfg.solver.max_iters < 1) fail(ErrorCode::ValidationError, "solver.max_iters: must be at least 1");
        if (cfg.solver.dt < 0.0) fail(ErrorCode::ValidationError, "solver.dt: must be nonnegative");
        if (!(cfg.solver.parabolic_dt > 0.0)) fail(ErrorCode::ValidationError, "solver.parabolic_dt: must be positive");
        if (cfg.solver.margin < 2.0) fail(ErrorCode::ValidationError, "solver.margin: must be at least 2");
    }
    if (r.has("params")) cfg.params = detail::parse_params(r.at("params"), "params", cfg.kind, cfg.study);
    r.opt("output_dir", cfg.output_dir);
    r.opt("seed", cfg.seed);
    r.finish();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---- builders ------------------------------------------------------------

inline Field build_profile(const ProfileSpec& p, const SpatialGrid& grid, int k) {
    if (p.file) {
        Field f = load_field(*p.file, grid);
        require(f.k() == k, ErrorCode::ValidationError, "profile file " + *p.file + " has the wrong component count");
        return f;
    }
    Field f = Field::zero(grid, k);
    for (const auto& t : p.terms) {
        require(t.component < k, ErrorCode::ValidationError, "profile component out of range");
        if (t.mode == 0) {
            f.values().col(t.component).array() += t.amp;
        } else {
            f += Field::sine_mode(grid, t.mode, t.amp, k, t.component);
        }
    }
    return f;
}

inline ForcingPtr build_forcing(const ForcingSpec& s, const SpatialGrid& grid, int k, double eps) {
    auto prof = [&](const ProfileSpec& p) { return build_profile(p, grid, k); };
    if (s.type == "zero") return Forcing::zero(grid, k);
    if (s.type == "constant") return Forcing::constant(prof(s.mean));
    if (s.type == "periodic") return Forcing::periodic(prof(s.mean), prof(s.osc), s.omega);
    if (s.type == "quasiperiodic") return Forcing::quasiperiodic(prof(s.mean), prof(s.osc), s.omega, prof(s.osc2), s.omega2);
    if (s.type == "heteroclinic") return Forcing::heteroclinic(prof(s.g_minus), prof(s.g_plus), s.scale);
    if (s.type == "patchwork") return Forcing::patchwork(build_forcing(*s.g1, grid, k, eps), build_forcing(*s.g2, grid, k, eps));
    if (s.type == "fast_scaled") {
        const ForcingPtr inner = build_forcing(*s.inner, grid, k, eps);
        const double e = s.eps.value_or(eps);
        // eps = 0 is the limit itself: the fast forcing has no pointwise limit, keep the inner law
        return e > 0.0 ? Forcing::fast_scaled(inner, e) : inner;
    }
    fail(ErrorCode::ValidationError, "unknown forcing type " + s.type);
}

inline Nonlinearity build_nonlinearity(const NonlinearitySpec& s, int k) {
    if (s.id == "zero") return zero_nonlinearity(k);
    if (s.id == "linear") return linear_nonlinearity(s.c, k);
    if (s.id == "chafee_infante") return chafee_infante(s.lambda, k);
    if (s.id == "coupled_cubic_pair") return coupled_cubic_pair(s.lambda, s.coupling);
    fail(ErrorCode::ValidationError, "unknown nonlinearity " + s.id);
}

inline CouplingMatrices build_matrices(const ProblemSpec& p) {
    auto mat = [&](const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) return Eigen::MatrixXd(Eigen::MatrixXd::Identity(p.k, p.k));
        Eigen::MatrixXd m(p.k, p.k);
        for (int i = 0; i < p.k; ++i)
            for (int j = 0; j < p.k; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
        return m;
    };
    try {
        return CouplingMatrices(mat(p.a), mat(p.gamma));
    } catch (const Error& e) {
        fail(ErrorCode::ValidationError, std::string("problem.a/gamma: ") + e.what());
    }
}

inline bool is_linear(const NonlinearitySpec& s) { return s.id == "zero" || s.id == "linear"; }

inline NewtonOptions build_newton(const ExperimentConfig& cfg) {
    NewtonOptions o;
    o.tol_residual = cfg.solver.tol_residual.value_or(is_linear(cfg.problem.nonlinearity) ? 1e-10 : 1e-8);
    o.max_iters = cfg.solver.max_iters;
    return o;
}

} // namespace ellab::io
