#include "cqd/runner.hpp"

#include <fstream>
#include <sstream>

namespace cqd::runner {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

const json& at_path(const json& doc, const std::string& path) {
    const json* cur = &doc;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!cur->is_object() || !cur->contains(part)) fail(path, "missing");
        cur = &(*cur)[part];
    }
    return *cur;
}

double number(const json& doc, const std::string& path) {
    const json& v = at_path(doc, path);
    if (!v.is_number()) fail(path, "expected a number, got " + v.dump());
    return v.get<double>();
}

long long integer(const json& doc, const std::string& path) {
    const json& v = at_path(doc, path);
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    fail(path, "expected an integer, got " + v.dump());
}

bool boolean(const json& doc, const std::string& path) {
    const json& v = at_path(doc, path);
    if (!v.is_boolean()) fail(path, "expected true or false, got " + v.dump());
    return v.get<bool>();
}

std::string text(const json& doc, const std::string& path) {
    const json& v = at_path(doc, path);
    if (!v.is_string()) fail(path, "expected a string, got " + v.dump());
    return v.get<std::string>();
}

std::vector<double> numbers(const json& doc, const std::string& path) {
    const json& v = at_path(doc, path);
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) fail(path, "expected an array of numbers, found " + e.dump());
        out.push_back(e.get<double>());
    }
    return out;
}

void require(bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, msg);
}

template <class F>
auto enum_field(const json& doc, const std::string& path, F parse) {
    const std::string s = text(doc, path);
    try {
        return parse(s);
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
}

Estimator estimator_from_string(const std::string& s) {
    if (s == "abs2_of_mean") return Estimator::Abs2OfMean;
    if (s == "mean_of_abs2") return Estimator::MeanOfAbs2;
    throw ConfigError("unknown estimator '" + s + "' (expected abs2_of_mean or mean_of_abs2)");
}

std::size_t line_of(const std::string& text, std::size_t byte, std::size_t& column) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    column = col;
    return line;
}

void merge_into(json& base, const json& user, const std::string& prefix) {
    if (!user.is_object()) fail(prefix.empty() ? "<root>" : prefix, "expected an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) fail(path, "unknown key");
        json& slot = base[it.key()];
        if (slot.is_object() && !slot.empty()) {
            merge_into(slot, it.value(), path);
        } else {
            slot = it.value();
        }
    }
}

} // namespace

std::string to_string(Abscissa a) {
    switch (a) {
    case Abscissa::N: return "N";
    case Abscissa::Xi: return "xi";
    case Abscissa::Xi2: return "xi^2";
    case Abscissa::TauN: return "tau_n";
    case Abscissa::NXi2: return "N*xi^2";
    case Abscissa::NXi2OverTauN: return "N*xi^2/tau_n";
    }
    return "N";
}

Abscissa abscissa_from_string(const std::string& s) {
    for (Abscissa a : {Abscissa::N, Abscissa::Xi, Abscissa::Xi2, Abscissa::TauN, Abscissa::NXi2, Abscissa::NXi2OverTauN}) {
        if (to_string(a) == s) return a;
    }
    throw ConfigError("unknown abscissa '" + s + "' (expected N, xi, xi^2, tau_n, N*xi^2 or N*xi^2/tau_n)");
}

std::string to_string(Ordinate o) {
    switch (o) {
    case Ordinate::DCriticalMinus: return "D(h=-1)";
    case Ordinate::DCriticalPlus: return "D(h=+1)";
    case Ordinate::DMax: return "D_max";
    case Ordinate::NonMarkov: return "nonmarkov";
    }
    return "D(h=+1)";
}

Ordinate ordinate_from_string(const std::string& s) {
    for (Ordinate o : {Ordinate::DCriticalMinus, Ordinate::DCriticalPlus, Ordinate::DMax, Ordinate::NonMarkov}) {
        if (to_string(o) == s) return o;
    }
    throw ConfigError("unknown fit quantity '" + s + "' (expected D(h=-1), D(h=+1), D_max or nonmarkov)");
}

json default_config_json() {
    return json::parse(R"({
        "experiment": "noiseless",
        "model": {"N": 500, "delta": 0.01, "tau_Q": 250.0, "h_i": -5.0, "h_f": 5.0, "energy_scale": 2.0},
        "noise": {"kind": "none", "xi": 0.0, "tau_n": 50.0},
        "route": "cross_operator",
        "ensemble": {"M": 2000, "seed": 1, "estimator": "abs2_of_mean", "common_noise": true, "dt_noise": 0.0},
        "integrator": {"rel_tol": 1e-12, "abs_tol": 1e-14, "max_step": 0.25, "min_step": 1e-12,
                       "rk4_step": 0.001, "grid_points": 2000},
        "master": {"ou_closure": "hierarchy", "hierarchy_depth": 3},
        "analysis": {"revival_window": [-1.0, 1.0], "peak_window": 5, "snapshot_h": [-1.0, 0.0, 1.0],
                     "nonmarkov": false, "compare_factorized": true, "convergence_check": false,
                     "convergence_h_i": -8.0},
        "sweep": {"axes": [], "budget": 64, "fits": []},
        "nonmarkov": {"white_xi": [0.001, 0.002, 0.003, 0.005], "ou_tau_n": [25.0, 50.0, 100.0, 200.0],
                      "ou_xi": 0.003},
        "validate": {"N": 8, "M": 4000, "inject_fault": ""},
        "threads": 0,
        "output": {"dir": "cqd-out"}
    })");
}

json merge_config(const json& base, const json& user) {
    json out = base;
    merge_into(out, user, "");
    return out;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + assignment + ": expected key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }
    json* cur = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!cur->is_object() || !cur->contains(parts[i])) fail(path, "unknown key (from --set)");
        cur = &(*cur)[parts[i]];
    }
    if (cur->is_object() && !cur->empty()) {
        merge_into(*cur, value, path);
    } else {
        *cur = value;
    }
}

json parse_config_text(const std::string& content, const std::string& origin) {
    try {
        return json::parse(content);
    } catch (const json::parse_error& e) {
        std::size_t col = 0;
        const std::size_t line = line_of(content, e.byte, col);
        std::ostringstream os;
        os << origin << ":" << line << ":" << col << ": syntax error: " << e.what();
        throw ConfigError(os.str());
    }
}

ExperimentConfig parse_config(const json& d) {
    ExperimentConfig c;
    c.source = d;

    c.experiment = text(d, "experiment");
    require(c.experiment == "noiseless" || c.experiment == "white" || c.experiment == "ou" || c.experiment == "sweep" ||
                c.experiment == "validate" || c.experiment == "nonmarkov",
            "experiment", "expected noiseless, white, ou, sweep, validate or nonmarkov, got '" + c.experiment + "'");

    const long long N = integer(d, "model.N");
    require(N >= 2 && N % 2 == 0 && N <= 1000000, "model.N", "must be an even integer >= 2");
    c.model.N = static_cast<int>(N);
    c.model.delta = number(d, "model.delta");
    require(c.model.delta >= 0.0 && std::isfinite(c.model.delta), "model.delta", "must be >= 0");
    const double tau_Q = number(d, "model.tau_Q");
    require(tau_Q > 0.0 && std::isfinite(tau_Q), "model.tau_Q", "must be positive");
    const double h_i = number(d, "model.h_i"), h_f = number(d, "model.h_f");
    require(h_i < h_f, "model.h_i", "must be smaller than model.h_f");
    const double scale = number(d, "model.energy_scale");
    require(scale > 0.0 && std::isfinite(scale), "model.energy_scale", "must be positive");
    c.model.ramp = RampProtocol(tau_Q, h_i, h_f, scale);

    const NoiseKind kind = enum_field(d, "noise.kind", noise_kind_from_string);
    const double xi = number(d, "noise.xi");
    require(xi >= 0.0 && std::isfinite(xi), "noise.xi", "must be >= 0");
    const double tau_n = number(d, "noise.tau_n");
    require(tau_n > 0.0 && std::isfinite(tau_n), "noise.tau_n", "must be positive");
    c.noise = {kind, xi, tau_n};

    c.route = enum_field(d, "route", route_from_string);

    const long long M = integer(d, "ensemble.M");
    require(M >= 2, "ensemble.M", "must be >= 2");
    c.ensemble.M = static_cast<std::size_t>(M);
    const json& seed = at_path(d, "ensemble.seed");
    require(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<long long>() >= 0), "ensemble.seed",
            "expected a non-negative 64-bit integer");
    c.ensemble.seed = seed.get<std::uint64_t>();
    c.ensemble.estimator = enum_field(d, "ensemble.estimator", estimator_from_string);
    c.ensemble.common_noise = boolean(d, "ensemble.common_noise");
    c.ensemble.dt_noise = number(d, "ensemble.dt_noise");
    require(c.ensemble.dt_noise >= 0.0, "ensemble.dt_noise", "must be >= 0 (0 selects the default)");

    c.integrator.rel_tol = number(d, "integrator.rel_tol");
    c.integrator.abs_tol = number(d, "integrator.abs_tol");
    c.integrator.max_step = number(d, "integrator.max_step");
    c.integrator.min_step = number(d, "integrator.min_step");
    c.integrator.rk4_step = number(d, "integrator.rk4_step");
    require(c.integrator.rel_tol > 0.0, "integrator.rel_tol", "must be positive");
    require(c.integrator.abs_tol > 0.0, "integrator.abs_tol", "must be positive");
    require(c.integrator.max_step > 0.0, "integrator.max_step", "must be positive");
    require(c.integrator.min_step > 0.0, "integrator.min_step", "must be positive");
    require(c.integrator.rk4_step > 0.0, "integrator.rk4_step", "must be positive");
    const long long gp = integer(d, "integrator.grid_points");
    require(gp >= 2 && gp <= 10000000, "integrator.grid_points", "must be >= 2");
    c.grid_points = static_cast<std::size_t>(gp);

    c.master.closure = enum_field(d, "master.ou_closure", ou_closure_from_string);
    const long long depth = integer(d, "master.hierarchy_depth");
    require(depth >= 1 && depth <= 64, "master.hierarchy_depth", "must be in [1, 64]");
    c.master.hierarchy_depth = static_cast<int>(depth);

    const auto win = numbers(d, "analysis.revival_window");
    require(win.size() == 2 && win[0] < win[1], "analysis.revival_window", "expected [h_lo, h_hi] with h_lo < h_hi");
    require(win[0] >= h_i && win[1] <= h_f, "analysis.revival_window", "must lie inside [model.h_i, model.h_f]");
    c.revival_h_lo = win[0];
    c.revival_h_hi = win[1];
    const long long pw = integer(d, "analysis.peak_window");
    require(pw >= 1 && pw <= 10000, "analysis.peak_window", "must be >= 1");
    c.peak_window = static_cast<int>(pw);
    c.snapshot_h = numbers(d, "analysis.snapshot_h");
    for (double h : c.snapshot_h) require(h >= h_i && h <= h_f, "analysis.snapshot_h", "values must lie in [h_i, h_f]");
    c.compute_nonmarkov = boolean(d, "analysis.nonmarkov");
    c.compare_factorized = boolean(d, "analysis.compare_factorized");
    c.convergence_check = boolean(d, "analysis.convergence_check");
    c.convergence_h_i = number(d, "analysis.convergence_h_i");
    require(c.convergence_h_i < h_i, "analysis.convergence_h_i", "must be below model.h_i");

    const json& axes = at_path(d, "sweep.axes");
    require(axes.is_array(), "sweep.axes", "expected an array of {\"path\", \"values\"} objects");
    const json defaults = default_config_json();
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const std::string where = "sweep.axes[" + std::to_string(i) + "]";
        const json& a = axes[i];
        require(a.is_object() && a.contains("path") && a.contains("values") && a.size() == 2, where,
                "expected {\"path\": ..., \"values\": [...]}");
        require(a["path"].is_string(), where + ".path", "expected a string");
        SweepAxis axis;
        axis.path = a["path"].get<std::string>();
        const json* probe = &defaults;
        std::stringstream ss(axis.path);
        std::string part;
        while (std::getline(ss, part, '.')) {
            require(probe->is_object() && probe->contains(part), where + ".path", "unknown parameter '" + axis.path + "'");
            probe = &(*probe)[part];
        }
        require(probe->is_primitive(), where + ".path", "'" + axis.path + "' is not a scalar parameter");
        require(axis.path.rfind("sweep", 0) != 0, where + ".path", "cannot sweep the sweep block itself");
        require(a["values"].is_array() && !a["values"].empty(), where + ".values", "must be a non-empty array");
        for (const auto& v : a["values"]) axis.values.push_back(v);
        c.axes.push_back(std::move(axis));
    }
    if (c.experiment == "sweep") require(!c.axes.empty(), "sweep.axes", "a sweep needs at least one axis");
    const long long budget = integer(d, "sweep.budget");
    require(budget >= 1, "sweep.budget", "must be >= 1");
    c.budget = static_cast<std::size_t>(budget);

    const json& fits = at_path(d, "sweep.fits");
    require(fits.is_array(), "sweep.fits", "expected an array");
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const std::string where = "sweep.fits[" + std::to_string(i) + "]";
        const json& f = fits[i];
        require(f.is_object(), where, "expected an object");
        for (auto it = f.begin(); it != f.end(); ++it) {
            const std::string& k = it.key();
            require(k == "name" || k == "x" || k == "y" || k == "model" || k == "peak" || k == "tau_n_min" ||
                        k == "tau_n_max",
                    where + "." + k, "unknown key");
        }
        FitSpec spec;
        try {
            spec.name = f.value("name", std::string("fit") + std::to_string(i));
            spec.x = abscissa_from_string(f.at("x").get<std::string>());
            spec.y = ordinate_from_string(f.at("y").get<std::string>());
            spec.model = fit_model_from_string(f.value("model", std::string("exponential")));
            spec.peak = f.value("peak", 0);
            if (f.contains("tau_n_min")) spec.tau_n_min = f["tau_n_min"].get<double>();
            if (f.contains("tau_n_max")) spec.tau_n_max = f["tau_n_max"].get<double>();
        } catch (const std::exception& e) {
            fail(where, e.what());
        }
        require(spec.peak >= 0, where + ".peak", "must be >= 0");
        c.fits.push_back(std::move(spec));
    }

    c.nonmarkov_white_xi = numbers(d, "nonmarkov.white_xi");
    c.nonmarkov_tau_n = numbers(d, "nonmarkov.ou_tau_n");
    c.nonmarkov_ou_xi = number(d, "nonmarkov.ou_xi");
    for (double x : c.nonmarkov_white_xi) require(x >= 0.0, "nonmarkov.white_xi", "values must be >= 0");
    for (double t : c.nonmarkov_tau_n) require(t > 0.0, "nonmarkov.ou_tau_n", "values must be positive");
    require(c.nonmarkov_ou_xi >= 0.0, "nonmarkov.ou_xi", "must be >= 0");

    const long long vN = integer(d, "validate.N");
    require(vN >= 2 && vN % 2 == 0 && vN <= 64, "validate.N", "must be an even integer in [2, 64]");
    c.validate_N = static_cast<int>(vN);
    const long long vM = integer(d, "validate.M");
    require(vM >= 2 && vM <= 5000, "validate.M", "must be in [2, 5000]");
    c.validate_M = static_cast<std::size_t>(vM);
    c.inject_fault = text(d, "validate.inject_fault");
    require(c.inject_fault.empty() || c.inject_fault == "gamma_feedback_sign", "validate.inject_fault",
            "expected \"\" or \"gamma_feedback_sign\"");

    const long long threads = integer(d, "threads");
    require(threads >= 0 && threads <= 4096, "threads", "must be in [0, 4096] (0 = hardware concurrency)");
    c.threads = static_cast<unsigned>(threads);
    c.ensemble.threads = c.threads;
    c.output_dir = text(d, "output.dir");
    require(!c.output_dir.empty(), "output.dir", "must not be empty");

    // Observation grid: uniform in h over the ramp.
    c.integrator.grid = uniform_field_grid(c.model.ramp, c.grid_points);
    return c;
}

ExperimentConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides,
                             const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& threads,
                             const std::optional<std::string>& output_dir) {
    json doc = default_config_json();
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError(file->string() + ": cannot open configuration file");
        std::stringstream buf;
        buf << in.rdbuf();
        doc = merge_config(doc, parse_config_text(buf.str(), file->string()));
    }
    for (const auto& o : overrides) apply_override(doc, o);
    if (seed) doc["ensemble"]["seed"] = *seed;
    if (threads) doc["threads"] = *threads;
    if (output_dir) doc["output"]["dir"] = *output_dir;
    return parse_config(doc);
}

} // namespace cqd::runner
