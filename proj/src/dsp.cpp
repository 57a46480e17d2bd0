#include "sqz/dsp.hpp"
#include "sqz/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sqz
{

namespace
{

constexpr double db_per_neper = 10.0 / std::numbers::ln10;

void require_same_bins(const VariancePhaseSeries &a, const VariancePhaseSeries &b, const char *what)
{
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i)
        same = a.bins[i].pulse_begin == b.bins[i].pulse_begin && a.bins[i].pulse_end == b.bins[i].pulse_end;
    if (!same)
        fail(ErrorCode::data, std::string(what) + ": series have different bin structure");
}

void append_warnings(std::vector<std::string> &to, const std::vector<std::string> &from)
{
    for (const auto &w : from)
        if (std::find(to.begin(), to.end(), w) == to.end())
            to.push_back(w);
}

double mean_error(const VariancePhaseSeries &s)
{
    double sum = 0.0;
    for (const auto &b : s.bins)
        sum += b.std_error * b.std_error;
    return std::sqrt(sum) / static_cast<double>(s.size());
}

} // namespace

double VariancePhaseSeries::mean_variance() const
{
    if (bins.empty())
        return 0.0;
    double sum = 0.0;
    for (const auto &b : bins)
        sum += b.variance;
    return sum / static_cast<double>(bins.size());
}

double VariancePhaseSeries::phase_rad(std::size_t bin) const
{
    const auto &b = bins.at(bin);
    if (total_pulses == 0)
        return ramp_start_rad;
    const double centre = 0.5 * static_cast<double>(b.pulse_begin + b.pulse_end - 1);
    return ramp_start_rad + (ramp_end_rad - ramp_start_rad) * centre / static_cast<double>(total_pulses);
}

QuadratureSeries integrate_pulses(const HomodyneTrace &trace, std::span<const double> kernel,
                                  std::size_t trigger_offset)
{
    const std::size_t w = trace.samples_per_pulse();
    if (w == 0)
        fail(ErrorCode::data, "trace has no integer pulse window");
    if (kernel.size() != w)
        fail(ErrorCode::invalid_argument, "kernel length " + std::to_string(kernel.size()) +
                                              " does not match the pulse window of " + std::to_string(w));
    const std::size_t n = trace.samples.size();
    if (trigger_offset == 0 && n % w != 0)
        fail(ErrorCode::data, "trace length " + std::to_string(n) + " is not a multiple of the pulse window");
    if (trigger_offset >= n)
        fail(ErrorCode::invalid_argument, "trigger offset beyond the end of the trace");

    QuadratureSeries q;
    q.ramp_start_rad = trace.ramp_start_rad;
    q.ramp_end_rad = trace.ramp_end_rad;

    std::vector<double> k(kernel.begin(), kernel.end());
    double norm2 = 0.0;
    for (double v : k)
        norm2 += v * v;
    if (!(norm2 > 0.0))
        fail(ErrorCode::invalid_argument, "kernel has zero norm");
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6)
    {
        const double scale = 1.0 / std::sqrt(norm2);
        for (double &v : k)
            v *= scale;
        std::ostringstream msg;
        msg << "kernel renormalised (L2 norm was " << std::sqrt(norm2) << ")";
        q.warnings.push_back(msg.str());
    }

    const std::size_t count = (n - trigger_offset) / w;
    q.values.resize(count);
    const float *data = trace.samples.data() + trigger_offset;
    for (std::size_t p = 0; p < count; ++p)
    {
        const float *window = data + p * w;
        double acc = 0.0;
        for (std::size_t i = 0; i < w; ++i)
            acc += k[i] * static_cast<double>(window[i]);
        q.values[p] = acc;
    }
    return q;
}

VariancePhaseSeries bin_variances(const QuadratureSeries &q, std::size_t pulses_per_bin)
{
    if (pulses_per_bin < 2)
        fail(ErrorCode::invalid_argument, "need at least 2 pulses per bin");
    const std::size_t n_bins = q.count() / pulses_per_bin;
    if (n_bins == 0)
        fail(ErrorCode::data, "series of " + std::to_string(q.count()) + " pulses is shorter than one bin");

    VariancePhaseSeries out;
    out.total_pulses = q.count();
    out.ramp_start_rad = q.ramp_start_rad;
    out.ramp_end_rad = q.ramp_end_rad;
    out.warnings = q.warnings;
    const std::size_t dropped = q.count() - n_bins * pulses_per_bin;
    if (dropped > 0)
        out.warnings.push_back("dropped " + std::to_string(dropped) + " trailing pulses that do not fill a bin");

    const double n = static_cast<double>(pulses_per_bin);
    const double rel_err = std::sqrt(2.0 / (n - 1.0));
    out.bins.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b)
    {
        // Welford's running update.
        double mean = 0.0, m2 = 0.0;
        const std::size_t begin = b * pulses_per_bin;
        for (std::size_t i = 0; i < pulses_per_bin; ++i)
        {
            const double x = q.values[begin + i];
            const double delta = x - mean;
            mean += delta / static_cast<double>(i + 1);
            m2 += delta * (x - mean);
        }
        const double var = m2 / (n - 1.0);
        out.bins[b] = {b, begin, begin + pulses_per_bin, var, var * rel_err};
    }
    return out;
}

VariancePhaseSeries aggregate_traces(std::span<const VariancePhaseSeries> series)
{
    if (series.empty())
        fail(ErrorCode::invalid_argument, "nothing to aggregate");
    if (series.size() == 1)
        return series.front();

    VariancePhaseSeries out = series.front();
    out.n_traces = 0;
    out.warnings.clear();
    for (const auto &s : series)
    {
        require_same_bins(out, s, "aggregate_traces");
        out.n_traces += s.n_traces;
        append_warnings(out.warnings, s.warnings);
    }

    const double m = static_cast<double>(series.size());
    for (std::size_t b = 0; b < out.size(); ++b)
    {
        double sum = 0.0;
        for (const auto &s : series)
            sum += s.bins[b].variance;
        const double mean = sum / m;
        double ss = 0.0;
        for (const auto &s : series)
        {
            const double d = s.bins[b].variance - mean;
            ss += d * d;
        }
        out.bins[b].variance = mean;
        out.bins[b].std_error = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
    }
    return out;
}

VariancePhaseSeries normalize_to_shot(const VariancePhaseSeries &squeezed, const VariancePhaseSeries &shot,
                                      const VariancePhaseSeries &electronic, bool subtract_electronic)
{
    require_same_bins(squeezed, shot, "normalize_to_shot");
    require_same_bins(squeezed, electronic, "normalize_to_shot");

    const double ms = shot.mean_variance();
    const double me = electronic.mean_variance();
    const double ms_err = mean_error(shot);
    const double me_err = mean_error(electronic);
    if (!(ms > 0.0))
        fail(ErrorCode::data, "shot-noise reference variance is not positive");

    VariancePhaseSeries out = squeezed;
    out.shot_reference_variance = ms;
    out.electronic_reference_variance = me;
    out.shot_reference_error = ms_err;
    out.electronic_reference_error = me_err;
    out.electronic_subtracted = subtract_electronic;
    append_warnings(out.warnings, shot.warnings);
    append_warnings(out.warnings, electronic.warnings);

    if (!subtract_electronic)
    {
        for (auto &b : out.bins)
        {
            b.variance /= ms;
            b.std_error /= ms;
        }
        return out;
    }

    if (!(ms >= 1.5 * me))
        fail(ErrorCode::data, "shot noise is not clear of electronic noise (ratio < 1.5); "
                              "refusing electronic-noise subtraction");
    const double den = ms - me;
    for (auto &b : out.bins)
    {
        b.variance = (b.variance - me) / den;
        b.std_error /= den;
    }
    return out;
}

namespace
{

/// Error of a normalised level s from the reference means it was divided by.
double reference_error(const VariancePhaseSeries &v, double s)
{
    const double ms = v.shot_reference_variance;
    if (!(ms > 0.0))
        return 0.0;
    if (!v.electronic_subtracted)
        return std::abs(s) * v.shot_reference_error / ms;
    const double den = ms - v.electronic_reference_variance;
    return std::hypot(s * v.shot_reference_error, (s - 1.0) * v.electronic_reference_error) / den;
}

struct HarmonicFit
{
    double slope = 0.0;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double c0_err = 0.0;
    double sse = INFINITY;
};

/// Weighted linear fit of y = c0 + c1 cos(2 a x) + c2 sin(2 a x) for fixed a.
HarmonicFit harmonic_fit(const Vector &x, const Vector &y, const Vector &w, double a)
{
    const Eigen::Index n = x.size();
    Matrix design(n, 3);
    for (Eigen::Index i = 0; i < n; ++i)
        design.row(i) << 1.0, std::cos(2.0 * a * x[i]), std::sin(2.0 * a * x[i]);
    const Matrix normal = design.transpose() * w.asDiagonal() * design;
    const Eigen::Vector3d rhs = design.transpose() * w.asDiagonal() * y;
    Eigen::LDLT<Matrix> ldlt(normal);
    HarmonicFit h;
    h.slope = a;
    if (ldlt.info() != Eigen::Success)
        return h;
    const Eigen::Vector3d c = ldlt.solve(rhs);
    const Vector r = design * c - y;
    h.c0 = c[0];
    h.c1 = c[1];
    h.c2 = c[2];
    h.sse = (w.array() * r.array().square()).sum();
    const Matrix inv = normal.inverse();
    h.c0_err = std::sqrt(std::max(0.0, inv(0, 0) * h.sse / std::max<double>(1.0, static_cast<double>(n - 3))));
    return h;
}

} // namespace

PhaseFit fit_phase_curve(const VariancePhaseSeries &v, const FitOptions &options)
{
    const Eigen::Index n = static_cast<Eigen::Index>(v.size());
    if (n < 8)
        fail(ErrorCode::invalid_argument, "phase fit needs at least 8 bins, got " + std::to_string(n));

    Vector x(n), y(n), w(n);
    bool all_err = true;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const auto &b = v.bins[static_cast<std::size_t>(i)];
        x[i] = static_cast<double>(i);
        y[i] = b.variance;
        all_err = all_err && b.std_error > 0.0 && std::isfinite(b.std_error);
        w[i] = all_err ? 1.0 / (b.std_error * b.std_error) : 1.0;
    }
    require(y.allFinite(), "phase fit: non-finite variance");
    if (!all_err)
        w.setOnes();

    // Coarse search over ramp slope: 0.05 to 4 ramp periods (pi in theta) per series.
    HarmonicFit best;
    const int grid = 800;
    const double lo = 0.05 * std::numbers::pi / static_cast<double>(n);
    const double hi = 4.0 * std::numbers::pi / static_cast<double>(n);
    for (int g = 0; g <= grid; ++g)
    {
        const double a = lo + (hi - lo) * g / grid;
        const auto h = harmonic_fit(x, y, w, a);
        if (h.sse < best.sse)
            best = h;
    }

    PhaseFit out;
    const double amplitude = std::hypot(best.c1, best.c2);
    if (amplitude <= 1e-12 * std::abs(best.c0))
    {
        // Flat series: no phase information, both levels equal the mean.
        out.s_minus_lin = out.s_plus_lin = best.c0;
        out.s_minus_lin_err = out.s_plus_lin_err = best.c0_err;
        out.fit.params = Vector{{best.c0, best.c0, 0.0, 0.0}};
        out.fit.std_errors = Vector{{best.c0_err, best.c0_err, 0.0, 0.0}};
        out.fit.covariance = out.fit.std_errors.array().square().matrix().asDiagonal();
        out.fit.sse = best.sse;
        out.fit.converged = true;
        out.fit.message = "flat series";
    }
    else
    {
        FitProblem problem;
        problem.residual = [&](const Vector &p) {
            Vector r(n);
            for (Eigen::Index i = 0; i < n; ++i)
                r[i] = phase_model(x[i], p) - y[i];
            return r;
        };
        problem.jacobian = [&](const Vector &p) {
            Matrix jac(n, 4);
            for (Eigen::Index i = 0; i < n; ++i)
                jac.row(i) = phase_model_gradient(x[i], p).transpose();
            return jac;
        };
        problem.weights = w;
        // -R cos(2 theta + 2b) = c1 cos(2 theta) + c2 sin(2 theta)
        const double offset = 0.5 * std::atan2(best.c2, -best.c1);
        const double floor = 1e-9;
        problem.initial = Vector{{std::max(best.c0 - amplitude, floor), best.c0 + amplitude, best.slope, offset}};
        problem.bounds = Bounds{Vector{{floor, floor, -INFINITY, -INFINITY}}, Vector::Constant(4, INFINITY)};

        out.fit = levenberg_marquardt(problem, options);
        ensure_converged(out.fit, "phase-curve fit");

        Vector p = out.fit.params;
        Vector e = out.fit.std_errors;
        if (p[0] > p[1])
        {
            std::swap(p[0], p[1]);
            std::swap(e[0], e[1]);
            p[3] += 0.5 * std::numbers::pi;
        }
        if (p[2] < 0.0)
        {
            p[2] = -p[2];
            p[3] = -p[3];
        }
        p[3] = std::fmod(p[3], std::numbers::pi);
        if (p[3] < 0.0)
            p[3] += std::numbers::pi;
        if (p[3] >= std::numbers::pi)
            p[3] = 0.0;
        out.s_minus_lin = p[0];
        out.s_plus_lin = p[1];
        out.s_minus_lin_err = e[0];
        out.s_plus_lin_err = e[1];
        out.ramp_slope = p[2];
        out.ramp_offset = p[3];
        out.ramp_slope_err = e[2];
        out.ramp_offset_err = e[3];
    }

    out.s_minus_lin_err = std::hypot(out.s_minus_lin_err, reference_error(v, out.s_minus_lin));
    out.s_plus_lin_err = std::hypot(out.s_plus_lin_err, reference_error(v, out.s_plus_lin));
    out.s_minus_db = linear_to_db(out.s_minus_lin);
    out.s_plus_db = linear_to_db(out.s_plus_lin);
    out.s_minus_db_err = db_per_neper * out.s_minus_lin_err / out.s_minus_lin;
    out.s_plus_db_err = db_per_neper * out.s_plus_lin_err / out.s_plus_lin;
    return out;
}

VariancePhaseSeries process_trace(const HomodyneTrace &trace, std::size_t pulses_per_bin,
                                  std::size_t trigger_offset)
{
    return bin_variances(integrate_pulses(trace, trace.kernel, trigger_offset), pulses_per_bin);
}

} // namespace sqz
