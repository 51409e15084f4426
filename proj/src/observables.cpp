#include "cqd/observables.hpp"

#include "cqd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace cqd {

std::vector<std::size_t> find_peaks(const std::vector<double>& y, int window) {
    if (window < 1) throw InvalidArgument("find_peaks: window must be >= 1");
    const std::size_t n = y.size();
    std::vector<std::size_t> peaks;
    if (n < 3) return peaks;

    std::vector<double> s(n);
    s.front() = y.front();
    s.back() = y.back();
    for (std::size_t i = 1; i + 1 < n; ++i) s[i] = (y[i - 1] + y[i] + y[i + 1]) / 3.0;

    const auto w = static_cast<std::size_t>(window);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && s[j + 1] == s[i]) ++j; // plateau [i, j]
        if (i >= w && j + w < n) {
            bool peak = true;
            for (std::size_t q = 1; q <= w && peak; ++q) {
                peak = s[i - q] < s[i] && s[j + q] < s[i];
            }
            if (peak) peaks.push_back(i + (j - i) / 2);
        }
        i = j + 1;
    }
    return peaks;
}

RevivalReport detect_revivals(const std::vector<double>& h, const std::vector<double>& D, double h_lo, double h_hi,
                              double theory_period, int window) {
    if (h.size() != D.size()) throw InvalidArgument("detect_revivals: h and D lengths differ");
    if (h.empty()) throw InvalidArgument("detect_revivals: empty series");
    if (!(h_lo < h_hi)) throw InvalidArgument("detect_revivals: empty h window");
    const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
    if (h_lo < *lo || h_hi > *hi) throw InvalidArgument("detect_revivals: h window outside the simulated range");

    RevivalReport rep;
    rep.theory_period = theory_period;
    for (std::size_t idx : find_peaks(D, window)) {
        if (h[idx] > h_lo && h[idx] < h_hi) rep.peaks.push_back({h[idx], D[idx], idx});
    }
    std::sort(rep.peaks.begin(), rep.peaks.end(), [](const auto& a, const auto& b) { return a.h < b.h; });
    if (rep.peaks.size() >= 2) {
        rep.period_estimate = (rep.peaks.back().h - rep.peaks.front().h) / static_cast<double>(rep.peaks.size() - 1);
    }
    return rep;
}

RevivalReport detect_revivals(const DecoherenceSeries& series, double h_lo, double h_hi, int window) {
    const double theory = series.delta > 0.0 && series.tau_Q > 0.0
                              ? std::numbers::pi / (4.0 * series.tau_Q * series.delta)
                              : std::numeric_limits<double>::infinity();
    return detect_revivals(series.fields, series.D, h_lo, h_hi, theory, window);
}

CriticalValue critical_value(const DecoherenceSeries& series, double h_c) {
    const auto& h = series.fields;
    if (h.empty()) throw InvalidArgument("critical_value: empty series");
    if (h_c < h.front() || h_c > h.back()) {
        std::ostringstream os;
        os << "critical_value: h_c = " << h_c << " outside the simulated range [" << h.front() << ", " << h.back()
           << "]";
        throw InvalidArgument(os.str());
    }
    const auto it = std::lower_bound(h.begin(), h.end(), h_c);
    const auto j = static_cast<std::size_t>(it - h.begin());
    CriticalValue cv;
    cv.h_c = h_c;
    if (h[j] == h_c || j == 0) {
        cv.t = series.times[j];
        cv.log_D = series.log_D[j];
    } else {
        const double w = (h_c - h[j - 1]) / (h[j] - h[j - 1]);
        cv.t = series.times[j - 1] + w * (series.times[j] - series.times[j - 1]);
        const double a = series.log_D[j - 1], b = series.log_D[j];
        cv.log_D = std::isinf(a) || std::isinf(b) ? std::min(a, b) : a + w * (b - a);
    }
    cv.D = std::exp(cv.log_D);
    if (cv.D < 1e-300) cv.D = 0.0;
    return cv;
}

std::string to_string(FitModel m) {
    switch (m) {
    case FitModel::Linear: return "linear";
    case FitModel::PowerLaw: return "power_law";
    case FitModel::Exponential: return "exponential";
    }
    return "linear";
}

FitModel fit_model_from_string(const std::string& s) {
    if (s == "linear") return FitModel::Linear;
    if (s == "power_law") return FitModel::PowerLaw;
    if (s == "exponential") return FitModel::Exponential;
    throw InvalidArgument("unknown fit model '" + s + "' (expected linear, power_law or exponential)");
}

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points, FitModel model, const std::string& x_definition) {
    if (points.size() < 3) throw InvalidArgument("fit_scaling: need at least 3 points");
    std::vector<double> xs, ys;
    std::ostringstream bad;
    std::size_t n_bad = 0;
    for (const auto& p : points) {
        double x = p.x, y = p.D;
        if (model != FitModel::Linear) {
            if (p.log_D) {
                y = *p.log_D;
            } else if (p.D > 0.0) {
                y = std::log(p.D);
            } else {
                bad << (n_bad++ ? ", " : "") << "(x=" << p.x << ", D=" << p.D << ")";
                continue;
            }
            if (!std::isfinite(y)) {
                bad << (n_bad++ ? ", " : "") << "(x=" << p.x << ", ln D=" << y << ")";
                continue;
            }
        }
        if (model == FitModel::PowerLaw) {
            if (!(p.x > 0.0)) {
                bad << (n_bad++ ? ", " : "") << "(x=" << p.x << ")";
                continue;
            }
            x = std::log(p.x);
        }
        xs.push_back(x);
        ys.push_back(y);
    }
    if (n_bad > 0) {
        throw InvalidArgument("fit_scaling: non-positive values under a log transform: " + bad.str());
    }

    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidArgument("fit_scaling: abscissa values are all equal");

    ScalingFit fit;
    fit.model = model;
    fit.x_definition = x_definition;
    fit.n_points = xs.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : (ss_res == 0.0 ? 1.0 : 0.0);
    fit.slope_std_err = xs.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
    return fit;
}

double trace_distance(const Mat2& rho1, const Mat2& rho2) {
    const Mat2 d = rho1 - rho2;
    const double scale = std::max({1.0, rho1.max_abs(), rho2.max_abs()});
    const double herm = std::max({std::abs(d.a11.imag()), std::abs(d.a22.imag()), std::abs(d.a12 - std::conj(d.a21))});
    if (herm > 1e-10 * scale) throw InvalidArgument("trace_distance: inputs are not Hermitian");
    const auto [l1, l2] = hermitian_eigenvalues(d);
    return 0.5 * (std::abs(l1) + std::abs(l2));
}

NonMarkovReport blp_measure(const std::vector<double>& times, const std::vector<double>& magnitude) {
    if (times.size() != magnitude.size()) throw InvalidArgument("blp_measure: times and coherence lengths differ");
    for (double m : magnitude) {
        if (!(m <= 1.0 + 1e-9) || !(m >= 0.0)) throw InvalidArgument("blp_measure: |d(t)| must lie in [0, 1]");
    }
    NonMarkovReport rep;
    std::size_t i = 0;
    const std::size_t n = magnitude.size();
    while (i + 1 < n) {
        if (magnitude[i + 1] > magnitude[i]) {
            std::size_t j = i + 1;
            while (j + 1 < n && magnitude[j + 1] > magnitude[j]) ++j;
            const double gain = magnitude[j] - magnitude[i];
            rep.increase_intervals.push_back({times[i], times[j], gain});
            rep.measure += gain;
            i = j;
        } else {
            ++i;
        }
    }
    return rep;
}

NonMarkovReport blp_measure(const std::vector<double>& times, const std::vector<cplx>& coherence) {
    std::vector<double> m(coherence.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(coherence[i]);
    return blp_measure(times, m);
}

NonMarkovReport blp_measure(const DecoherenceSeries& series) {
    return blp_measure(series.times, series.coherence_magnitude());
}

ScalingFit nonmarkov_vs_tau_n(const std::vector<std::pair<double, double>>& tau_n_and_measure) {
    if (tau_n_and_measure.size() < 4) throw InvalidArgument("nonmarkov_vs_tau_n: need at least 4 tau_n values");
    std::vector<ScalingPoint> pts;
    for (const auto& [tau, m] : tau_n_and_measure) pts.push_back({tau, m, std::nullopt});
    return fit_scaling(pts, FitModel::Linear, "tau_n");
}

} // namespace cqd
