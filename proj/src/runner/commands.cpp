#include "detail.hpp"

#include "cqd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cqd::runner {

using detail::fmt;

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct PointSummary {
    int N{0};
    double xi{0.0};
    double tau_n{0.0};
    bool noisy{false};
    NoiseKind kind{NoiseKind::None};
    CriticalValue minus{}, plus{};
    bool have_minus{false}, have_plus{false};
    RevivalReport revivals;
    std::optional<double> nonmarkov;
};

PointSummary summarize(const ExperimentConfig& cfg, const PointResult& r) {
    PointSummary s;
    const NoiseModel noise = effective_noise(cfg);
    s.N = cfg.model.N;
    s.kind = noise.kind;
    s.noisy = !noise.silent();
    s.xi = noise.kind == NoiseKind::None ? 0.0 : noise.xi;
    s.tau_n = noise.kind == NoiseKind::OU ? noise.tau_n : 0.0;
    const auto& ramp = cfg.model.ramp;
    if (ramp.h_i <= -1.0 && ramp.h_f >= -1.0) {
        s.minus = critical_value(r.series, -1.0);
        s.have_minus = true;
    }
    if (ramp.h_i <= 1.0 && ramp.h_f >= 1.0) {
        s.plus = critical_value(r.series, 1.0);
        s.have_plus = true;
    }
    s.revivals = detect_revivals(r.series, cfg.revival_h_lo, cfg.revival_h_hi, cfg.peak_window);
    if (cfg.compute_nonmarkov) s.nonmarkov = blp_measure(r.series).measure;
    return s;
}

json summary_json(const PointSummary& s) {
    json j;
    if (s.have_minus) j["critical_minus"] = {{"h", -1.0}, {"D", s.minus.D}, {"log_D", s.minus.log_D}};
    if (s.have_plus) j["critical_plus"] = {{"h", 1.0}, {"D", s.plus.D}, {"log_D", s.plus.log_D}};
    json peaks = json::array();
    for (const auto& p : s.revivals.peaks) peaks.push_back({{"h", p.h}, {"D", p.D}});
    j["revivals"] = {{"peaks", peaks}, {"theory_period", std::isfinite(s.revivals.theory_period)
                                                                ? json(s.revivals.theory_period)
                                                                : json(nullptr)}};
    if (s.revivals.period_estimate) j["revivals"]["period_estimate"] = *s.revivals.period_estimate;
    if (s.nonmarkov) j["nonmarkov"] = *s.nonmarkov;
    return j;
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return fmt(v.get<double>());
    return v.dump();
}

double abscissa_value(Abscissa a, const PointSummary& s) {
    const double N = s.N;
    switch (a) {
    case Abscissa::N: return N;
    case Abscissa::Xi: return s.xi;
    case Abscissa::Xi2: return s.xi * s.xi;
    case Abscissa::TauN: return s.tau_n;
    case Abscissa::NXi2: return N * s.xi * s.xi;
    case Abscissa::NXi2OverTauN: return s.tau_n > 0.0 ? N * s.xi * s.xi / s.tau_n : nan;
    }
    return nan;
}

std::optional<ScalingPoint> ordinate_point(const FitSpec& f, const PointSummary& s) {
    ScalingPoint p;
    p.x = abscissa_value(f.x, s);
    if (!std::isfinite(p.x)) return std::nullopt;
    switch (f.y) {
    case Ordinate::DCriticalMinus:
        if (!s.have_minus) return std::nullopt;
        p.D = s.minus.D;
        p.log_D = s.minus.log_D;
        break;
    case Ordinate::DCriticalPlus:
        if (!s.have_plus) return std::nullopt;
        p.D = s.plus.D;
        p.log_D = s.plus.log_D;
        break;
    case Ordinate::DMax:
        if (static_cast<std::size_t>(f.peak) >= s.revivals.peaks.size()) return std::nullopt;
        p.D = s.revivals.peaks[static_cast<std::size_t>(f.peak)].D;
        break;
    case Ordinate::NonMarkov:
        if (!s.nonmarkov) return std::nullopt;
        p.D = *s.nonmarkov;
        break;
    }
    return p;
}

json fit_json(const FitSpec& f, const std::vector<PointSummary>& points) {
    json j;
    j["name"] = f.name;
    j["x"] = to_string(f.x);
    j["y"] = to_string(f.y);
    j["model"] = to_string(f.model);
    if (f.y == Ordinate::DMax) j["peak"] = f.peak;
    if (f.tau_n_min) j["tau_n_min"] = *f.tau_n_min;
    if (f.tau_n_max) j["tau_n_max"] = *f.tau_n_max;
    std::vector<ScalingPoint> pts;
    for (const auto& s : points) {
        if (f.tau_n_min && !(s.tau_n >= *f.tau_n_min)) continue;
        if (f.tau_n_max && !(s.tau_n <= *f.tau_n_max)) continue;
        if (auto p = ordinate_point(f, s)) pts.push_back(*p);
    }
    json data = json::array();
    for (const auto& p : pts) data.push_back({p.x, p.log_D ? *p.log_D : p.D});
    j["points"] = data;
    j["points_are_log_D"] = f.y == Ordinate::DCriticalMinus || f.y == Ordinate::DCriticalPlus;
    if (pts.size() < 3) {
        j["status"] = "insufficient points";
        j["n_points"] = pts.size();
        return j;
    }
    try {
        const ScalingFit fit = fit_scaling(pts, f.model, to_string(f.x));
        j["status"] = "ok";
        j["slope"] = fit.slope;
        j["intercept"] = fit.intercept;
        j["r_squared"] = fit.r_squared;
        j["slope_std_err"] = fit.slope_std_err;
        j["n_points"] = fit.n_points;
        j["x_definition"] = fit.x_definition;
    } catch (const InvalidArgument& e) {
        j["status"] = std::string("error: ") + e.what();
        j["n_points"] = pts.size();
    }
    return j;
}

bool has_axis(const ExperimentConfig& cfg, const std::string& path) {
    return std::any_of(cfg.axes.begin(), cfg.axes.end(), [&](const SweepAxis& a) { return a.path == path; });
}

std::vector<FitSpec> automatic_fits(const ExperimentConfig& cfg, const std::vector<PointSummary>& points) {
    std::vector<FitSpec> fits;
    const bool white = std::any_of(points.begin(), points.end(), [](const auto& s) { return s.noisy && s.kind == NoiseKind::White; });
    const bool ou = std::any_of(points.begin(), points.end(), [](const auto& s) { return s.noisy && s.kind == NoiseKind::OU; });
    if (white) {
        fits.push_back({"lnD_plus_vs_N_xi2", Abscissa::NXi2, Ordinate::DCriticalPlus, FitModel::Exponential, 0, {}, {}});
        fits.push_back({"lnD_minus_vs_N_xi2", Abscissa::NXi2, Ordinate::DCriticalMinus, FitModel::Exponential, 0, {}, {}});
    }
    if (ou) {
        fits.push_back({"lnD_minus_vs_N_xi2_over_tau_n", Abscissa::NXi2OverTauN, Ordinate::DCriticalMinus,
                        FitModel::Exponential, 0, {}, {}});
        fits.push_back({"lnD_plus_vs_N_xi2_over_tau_n", Abscissa::NXi2OverTauN, Ordinate::DCriticalPlus,
                        FitModel::Exponential, 0, {}, {}});
    }
    if (has_axis(cfg, "noise.xi")) {
        fits.push_back({"lnDmax_vs_xi2", Abscissa::Xi2, Ordinate::DMax, FitModel::Exponential, 0, {}, {}});
    }
    if (ou && has_axis(cfg, "noise.tau_n")) {
        fits.push_back({"Dmax_fast_linear_vs_tau_n", Abscissa::TauN, Ordinate::DMax, FitModel::Linear, 0, {}, 100.0});
        fits.push_back({"Dmax_slow_power_law_vs_tau_n", Abscissa::TauN, Ordinate::DMax, FitModel::PowerLaw, 0, 250.0, {}});
        fits.push_back({"Dmax_slow_exponential_vs_tau_n", Abscissa::TauN, Ordinate::DMax, FitModel::Exponential, 0, 250.0, {}});
        if (cfg.compute_nonmarkov) {
            fits.push_back({"nonmarkov_vs_tau_n", Abscissa::TauN, Ordinate::NonMarkov, FitModel::Linear, 0, {}, {}});
        }
    }
    return fits;
}

// Cartesian product of the axes in row-major order (last axis fastest).
std::vector<std::vector<json>> combinations(const ExperimentConfig& cfg) {
    std::vector<std::vector<json>> out{{}};
    for (const auto& axis : cfg.axes) {
        std::vector<std::vector<json>> next;
        for (const auto& prefix : out) {
            for (const auto& v : axis.values) {
                auto row = prefix;
                row.push_back(v);
                next.push_back(std::move(row));
            }
        }
        out = std::move(next);
    }
    return out;
}

void add_warnings(json& manifest, const std::vector<std::string>& warnings, const std::string& where) {
    for (const auto& w : warnings) manifest["warnings"].push_back(where.empty() ? w : where + ": " + w);
}

} // namespace

std::vector<std::filesystem::path> command_run(const ExperimentConfig& cfg) {
    const std::string started = detail::iso_timestamp();
    if (cfg.experiment != "noiseless" && cfg.experiment != "white" && cfg.experiment != "ou") {
        throw ConfigError("experiment: 'run' needs noiseless, white or ou, got '" + cfg.experiment + "'");
    }
    detail::OutputStage stage(cfg.output_dir);
    const PointResult r = simulate_point(cfg);
    stage.write("series.csv", detail::series_csv(r));
    stage.write("modes.csv", detail::modes_csv(r.series, cfg.snapshot_h));

    json manifest = detail::manifest_base(cfg, "run", started);
    manifest["route"] = to_string(r.series.route);
    manifest["summary"] = summary_json(summarize(cfg, r));
    if (r.convergence_max_abs_dD) manifest["summary"]["convergence_max_abs_dD"] = *r.convergence_max_abs_dD;
    add_warnings(manifest, r.warnings, "");
    return stage.commit(std::move(manifest));
}

std::size_t sweep_run_count(const ExperimentConfig& cfg) {
    std::size_t n = 1;
    for (const auto& a : cfg.axes) n *= a.values.size();
    return n;
}

std::vector<std::filesystem::path> command_sweep(const ExperimentConfig& cfg) {
    const std::string started = detail::iso_timestamp();
    if (cfg.axes.empty()) throw ConfigError("sweep.axes: a sweep needs at least one axis");
    const std::size_t runs = sweep_run_count(cfg);
    if (runs > cfg.budget) {
        throw ConfigError("sweep.budget: the axes define " + std::to_string(runs) + " runs, budget is " +
                          std::to_string(cfg.budget) + "; raise sweep.budget or shrink the axes");
    }

    // Every point is resolved and validated before any computation starts.
    const auto combos = combinations(cfg);
    std::vector<ExperimentConfig> point_cfgs;
    for (const auto& combo : combos) {
        json doc = cfg.source;
        std::ostringstream where;
        for (std::size_t a = 0; a < cfg.axes.size(); ++a) {
            doc = detail::with_value(doc, cfg.axes[a].path, combo[a]);
            where << (a ? ", " : "") << cfg.axes[a].path << "=" << scalar_text(combo[a]);
        }
        try {
            point_cfgs.push_back(parse_config(doc));
        } catch (const ConfigError& e) {
            throw ConfigError("sweep point (" + where.str() + "): " + e.what());
        }
        detail::effective_route(point_cfgs.back(), effective_noise(point_cfgs.back()));
    }

    detail::OutputStage stage(cfg.output_dir);
    json manifest = detail::manifest_base(cfg, "sweep", started);
    manifest["runs"] = json::array();

    std::vector<PointSummary> summaries;
    std::ostringstream csv;
    for (const auto& a : cfg.axes) csv << a.path << ',';
    csv << "N,xi,tau_n,D_h-1,log_D_h-1,D_h+1,log_D_h+1,n_peaks,D_max,nonmarkov\n";
    for (std::size_t i = 0; i < point_cfgs.size(); ++i) {
        const PointResult r = simulate_point(point_cfgs[i]);
        const PointSummary s = summarize(point_cfgs[i], r);
        summaries.push_back(s);

        json run;
        for (std::size_t a = 0; a < cfg.axes.size(); ++a) {
            run["axes"][cfg.axes[a].path] = combos[i][a];
            csv << scalar_text(combos[i][a]) << ',';
        }
        run["seed"] = point_cfgs[i].ensemble.seed;
        run["route"] = to_string(r.series.route);
        run["summary"] = summary_json(s);
        manifest["runs"].push_back(run);
        add_warnings(manifest, r.warnings, "run " + std::to_string(i));

        csv << s.N << ',' << fmt(s.xi) << ',' << fmt(s.tau_n) << ',' << (s.have_minus ? fmt(s.minus.D) : "") << ','
            << (s.have_minus ? fmt(s.minus.log_D) : "") << ',' << (s.have_plus ? fmt(s.plus.D) : "") << ','
            << (s.have_plus ? fmt(s.plus.log_D) : "") << ',' << s.revivals.peaks.size() << ',';
        for (std::size_t p = 0; p < s.revivals.peaks.size(); ++p) csv << (p ? ";" : "") << fmt(s.revivals.peaks[p].D);
        csv << ',' << (s.nonmarkov ? fmt(*s.nonmarkov) : "") << '\n';
    }
    stage.write("scaling.csv", csv.str());

    const auto specs = cfg.fits.empty() ? automatic_fits(cfg, summaries) : cfg.fits;
    json fits = json::array();
    for (const auto& f : specs) fits.push_back(fit_json(f, summaries));
    stage.write("fits.json", json{{"fits", fits}}.dump(2) + "\n");
    return stage.commit(std::move(manifest));
}

std::vector<std::filesystem::path> command_nonmarkov(const ExperimentConfig& cfg) {
    const std::string started = detail::iso_timestamp();
    if (cfg.nonmarkov_white_xi.empty() && cfg.nonmarkov_tau_n.empty()) {
        throw ConfigError("nonmarkov: both nonmarkov.white_xi and nonmarkov.ou_tau_n are empty");
    }
    std::vector<ExperimentConfig> points;
    for (double xi : cfg.nonmarkov_white_xi) {
        json doc = detail::with_value(cfg.source, "experiment", "white");
        doc = detail::with_value(doc, "noise.xi", xi);
        points.push_back(parse_config(doc));
    }
    for (double tau : cfg.nonmarkov_tau_n) {
        json doc = detail::with_value(cfg.source, "experiment", "ou");
        doc = detail::with_value(doc, "noise.xi", cfg.nonmarkov_ou_xi);
        doc = detail::with_value(doc, "noise.tau_n", tau);
        points.push_back(parse_config(doc));
    }
    for (const auto& p : points) detail::effective_route(p, effective_noise(p));

    detail::OutputStage stage(cfg.output_dir);
    json manifest = detail::manifest_base(cfg, "nonmarkov", started);
    std::ostringstream csv;
    csv << "kind,xi,tau_n,nonmarkov,n_rising_intervals\n";
    std::vector<std::pair<double, double>> white, ou;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const PointResult r = simulate_point(points[i]);
        const NonMarkovReport rep = blp_measure(r.series);
        const NoiseModel n = effective_noise(points[i]);
        const bool is_ou = points[i].experiment == "ou";
        csv << (is_ou ? "ou" : "white") << ',' << fmt(n.xi) << ',' << (is_ou ? fmt(n.tau_n) : "") << ','
            << fmt(rep.measure) << ',' << rep.increase_intervals.size() << '\n';
        (is_ou ? ou : white).emplace_back(is_ou ? n.tau_n : n.xi, rep.measure);
        add_warnings(manifest, r.warnings, "run " + std::to_string(i));
    }
    stage.write("scaling.csv", csv.str());

    json fits;
    if (!white.empty()) {
        bool decreasing = true;
        for (std::size_t i = 1; i < white.size(); ++i) {
            if (white[i].first > white[i - 1].first && !(white[i].second < white[i - 1].second)) decreasing = false;
        }
        json vals = json::array();
        for (const auto& [xi, m] : white) vals.push_back({xi, m});
        fits["white_vs_xi"] = {{"points", vals}, {"monotone_decreasing", decreasing}};
    }
    if (!ou.empty()) {
        json vals = json::array();
        for (const auto& [tau, m] : ou) vals.push_back({tau, m});
        json f = {{"points", vals}, {"xi", cfg.nonmarkov_ou_xi}, {"model", "linear"}, {"x_definition", "tau_n"}};
        if (ou.size() >= 4) {
            const ScalingFit fit = nonmarkov_vs_tau_n(ou);
            f["status"] = "ok";
            f["slope"] = fit.slope;
            f["intercept"] = fit.intercept;
            f["r_squared"] = fit.r_squared;
            f["slope_std_err"] = fit.slope_std_err;
        } else {
            f["status"] = "insufficient points";
        }
        fits["ou_vs_tau_n"] = f;
    }
    stage.write("fits.json", fits.dump(2) + "\n");
    return stage.commit(std::move(manifest));
}

} // namespace cqd::runner
