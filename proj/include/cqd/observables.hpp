// observables.hpp: analysis of decoherence series: revivals, critical values, scaling
// fits and the BLP non-Markovianity measure

#pragma once

#include "cqd/decoherence.hpp"
#include "cqd/mat2.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cqd {

struct RevivalPeak {
    double h{0.0};
    double D{0.0};     // raw (unsmoothed) value at the peak
    std::size_t index{0};
};

struct RevivalReport {
    std::vector<RevivalPeak> peaks;        // sorted by h
    std::optional<double> period_estimate; // mean spacing in h, when >= 2 peaks
    double theory_period{0.0};             // pi / (4 tau_Q delta); infinite for delta = 0
};

// Indices of local maxima of y: after a 3-point moving average, a point (or the midpoint
// of a plateau) must be strictly above its `window` neighbours on each side.
std::vector<std::size_t> find_peaks(const std::vector<double>& y, int window = 5);

// Peaks of D(h) restricted to h in [h_lo, h_hi].
RevivalReport detect_revivals(const DecoherenceSeries& series, double h_lo, double h_hi, int window = 5);

// Same on raw samples, for synthetic inputs.
RevivalReport detect_revivals(const std::vector<double>& h, const std::vector<double>& D, double h_lo, double h_hi,
                              double theory_period, int window = 5);

struct CriticalValue {
    double h_c{0.0};
    double t{0.0};
    double log_D{0.0};
    double D{1.0};
};

// D where h(t) = h_c, interpolating ln D linearly between the bracketing grid points.
CriticalValue critical_value(const DecoherenceSeries& series, double h_c);

enum class FitModel { Linear, PowerLaw, Exponential };

std::string to_string(FitModel m);
FitModel fit_model_from_string(const std::string& s);

struct ScalingPoint {
    double x{0.0};
    double D{0.0};
    std::optional<double> log_D; // used by the logarithmic models when present (survives underflow)
};

struct ScalingFit {
    FitModel model{FitModel::Linear};
    double slope{0.0};
    double intercept{0.0};
    double r_squared{0.0};
    double slope_std_err{0.0};
    std::size_t n_points{0};
    std::string x_definition;
};

// Ordinary least squares on the transformed coordinates:
//   linear: D vs x; exponential: ln D vs x; power law: ln D vs ln x.
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points, FitModel model, const std::string& x_definition);

// Half the trace norm of rho1 - rho2 for Hermitian 2x2 inputs.
double trace_distance(const Mat2& rho1, const Mat2& rho2);

struct IncreaseInterval {
    double t_start{0.0};
    double t_end{0.0};
    double gain{0.0};
};

struct NonMarkovReport {
    double measure{0.0};
    std::vector<IncreaseInterval> increase_intervals;
};

// For pure dephasing the optimal pair is an antipodal equatorial pair and the trace
// distance equals |d(t)|; the measure sums its gains over the maximal rising intervals.
NonMarkovReport blp_measure(const std::vector<double>& times, const std::vector<double>& coherence_magnitude);
NonMarkovReport blp_measure(const std::vector<double>& times, const std::vector<cplx>& coherence);
// |d(t)| = sqrt(D) taken from log_D, which equals |d_complex| and survives underflow.
NonMarkovReport blp_measure(const DecoherenceSeries& series);

// Linear fit of the measure against tau_n; needs >= 4 (tau_n, measure) pairs.
ScalingFit nonmarkov_vs_tau_n(const std::vector<std::pair<double, double>>& tau_n_and_measure);

} // namespace cqd
