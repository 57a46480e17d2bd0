#ifndef SQZ_DSP_HPP
#define SQZ_DSP_HPP

// Trace -> variance pipeline: pulse-window integration, phase binning,
// multi-trace aggregation, shot-noise normalisation and the phase-curve fit.

#include "sqz/fit.hpp"
#include "sqz/synth.hpp"

#include <span>
#include <string>
#include <vector>

namespace sqz
{

struct QuadratureSeries
{
    std::vector<double> values; // one integrated quadrature per pulse window
    double ramp_start_rad = 0.0;
    double ramp_end_rad = 0.0;
    std::vector<std::string> warnings;

    std::size_t count() const { return values.size(); }
};

struct VarianceBin
{
    std::size_t index = 0;
    std::size_t pulse_begin = 0;
    std::size_t pulse_end = 0; // exclusive
    double variance = 0.0;
    double std_error = 0.0;
};

struct VariancePhaseSeries
{
    std::vector<VarianceBin> bins;
    std::size_t total_pulses = 0;  // pulses of the source series, including any dropped remainder
    std::size_t n_traces = 1;
    double shot_reference_variance = 0.0;       // set by normalize_to_shot
    double electronic_reference_variance = 0.0; // set by normalize_to_shot
    // Errors of the two reference means. They are common to every bin, so they
    // stay out of the per-bin errors and are added to the fitted levels instead.
    double shot_reference_error = 0.0;
    double electronic_reference_error = 0.0;
    bool electronic_subtracted = false;
    double ramp_start_rad = 0.0;
    double ramp_end_rad = 0.0;
    std::vector<std::string> warnings;

    std::size_t size() const { return bins.size(); }
    double mean_variance() const;

    /// Ramp phase at the bin's centre pulse.
    double phase_rad(std::size_t bin) const;
};

/// q_k = sum_i kernel_i * sample[offset + k w + i]. A kernel whose norm is off by
/// more than 1e-6 is renormalised and a warning is recorded.
QuadratureSeries integrate_pulses(const HomodyneTrace &trace, std::span<const double> kernel,
                                  std::size_t trigger_offset = 0);

/// Unbiased per-bin variance; standard error = variance * sqrt(2 / (n - 1)).
/// Trailing pulses that do not fill a bin are dropped with a warning.
VariancePhaseSeries bin_variances(const QuadratureSeries &q, std::size_t pulses_per_bin = 5000);

/// Per-bin mean; standard error = sample std across traces / sqrt(n_traces).
/// A single series passes through unchanged.
VariancePhaseSeries aggregate_traces(std::span<const VariancePhaseSeries> series);

/// As-measured mode: v / mean(v_shot). Corrected mode subtracts the mean
/// electronic variance from numerator and denominator; it is refused when the
/// shot level is less than 1.5x the electronic level.
VariancePhaseSeries normalize_to_shot(const VariancePhaseSeries &squeezed, const VariancePhaseSeries &shot,
                                      const VariancePhaseSeries &electronic, bool subtract_electronic = false);

struct PhaseFit
{
    double s_minus_lin = 1.0;
    double s_minus_lin_err = 0.0;
    double s_plus_lin = 1.0;
    double s_plus_lin_err = 0.0;
    double s_minus_db = 0.0;
    double s_minus_db_err = 0.0;
    double s_plus_db = 0.0;
    double s_plus_db_err = 0.0;
    double ramp_slope = 0.0;  // rad per bin
    double ramp_offset = 0.0; // rad
    double ramp_slope_err = 0.0;
    double ramp_offset_err = 0.0;
    FitResult fit;
};

/// Weighted fit of V(bin) = S+ sin^2(a bin + b) + S- cos^2(a bin + b) to a
/// normalised series. Needs at least 8 bins. The level errors include the
/// reference-mean errors recorded by normalize_to_shot.
PhaseFit fit_phase_curve(const VariancePhaseSeries &v, const FitOptions &options = {});

/// integrate_pulses followed by bin_variances, using the trace's own kernel.
VariancePhaseSeries process_trace(const HomodyneTrace &trace, std::size_t pulses_per_bin = 5000,
                                  std::size_t trigger_offset = 0);

} // namespace sqz

#endif // SQZ_DSP_HPP
