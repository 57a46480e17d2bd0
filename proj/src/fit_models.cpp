#include "sqz/error.hpp"
#include "sqz/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sqz
{

namespace
{

constexpr double alpha_floor = 1e-12;
constexpr double db_per_neper = 10.0 / std::numbers::ln10;

} // namespace

std::array<double, 2> amplifier_gradient(double peak_power_w, Branch branch, double eta, double alpha_per_w)
{
    const double s = sign_of(branch);
    const double ap = alpha_per_w * peak_power_w;
    const double e = std::exp(s * 2.0 * std::sqrt(ap));
    // d/dalpha of 2 sqrt(alpha P) = sqrt(P / alpha)
    const double dx = ap > 0.0 ? peak_power_w / std::sqrt(ap) : 0.0;
    return {e - 1.0, eta * s * e * dx};
}

std::array<double, 2> initial_amplifier_guess(std::span<const AmplifierPoint> points)
{
    // Look for a +/- pair at the highest power: (G+ + G- - 2) / (G+ - G-) = tanh(x / 2).
    double best_p = -1.0, g_plus = 0.0, g_minus = 0.0;
    for (const auto &a : points)
    {
        if (a.branch != Branch::plus || a.peak_power_w <= best_p)
            continue;
        for (const auto &b : points)
        {
            if (b.branch == Branch::minus && b.peak_power_w == a.peak_power_w)
            {
                best_p = a.peak_power_w;
                g_plus = db_to_linear(a.value_db);
                g_minus = db_to_linear(b.value_db);
            }
        }
    }
    if (best_p > 0.0 && g_plus > g_minus)
    {
        const double ratio = (g_plus + g_minus - 2.0) / (g_plus - g_minus);
        if (ratio > 0.0 && ratio < 1.0)
        {
            const double x = 2.0 * std::atanh(ratio);
            const double eta = (g_plus - g_minus) / (2.0 * std::sinh(x));
            if (eta > 0.0 && eta <= 1.0)
                return {eta, x * x / (4.0 * best_p)};
        }
    }

    // Small-signal slope of the + branch: ln G+ ~ 2 eta sqrt(alpha P).
    const double eta = 0.9;
    double num = 0.0, den = 0.0;
    for (const auto &pt : points)
    {
        if (pt.peak_power_w <= 0.0)
            continue;
        const double y = std::log(db_to_linear(pt.value_db)) * sign_of(pt.branch);
        const double xs = std::sqrt(pt.peak_power_w);
        num += y * xs;
        den += xs * xs;
    }
    const double slope = den > 0.0 ? std::max(num / den, 1e-3) : 1.0;
    const double sqrt_alpha = slope / (2.0 * eta);
    return {eta, std::max(sqrt_alpha * sqrt_alpha, 1e-6)};
}

CurveFit fit_amplifier_curve(std::span<const AmplifierPoint> points, const CurveFitOptions &options)
{
    require(!points.empty(), "curve fit needs data points");
    for (const auto &pt : points)
        require(std::isfinite(pt.peak_power_w) && pt.peak_power_w >= 0.0 && std::isfinite(pt.value_db),
                "curve points need finite, nonnegative power and finite dB values");
    if (options.fixed_alpha)
        require(*options.fixed_alpha >= 0.0, "fixed alpha must be >= 0");

    const bool free_alpha = !options.fixed_alpha.has_value();
    const Eigen::Index n = static_cast<Eigen::Index>(points.size());
    const bool have_sigma = std::all_of(points.begin(), points.end(), [](const auto &p) { return p.sigma_db > 0.0; });
    const bool in_db = options.space == DataSpace::decibel;

    Vector data(n), weights = Vector::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const auto &pt = points[static_cast<std::size_t>(i)];
        data[i] = in_db ? pt.value_db : db_to_linear(pt.value_db);
        if (have_sigma)
        {
            const double sigma = in_db ? pt.sigma_db : data[i] * pt.sigma_db / db_per_neper;
            weights[i] = 1.0 / (sigma * sigma);
        }
    }

    const double alpha_fixed = options.fixed_alpha.value_or(0.0);
    auto unpack = [&](const Vector &p) {
        return std::pair{p[0], free_alpha ? std::max(p[1], alpha_floor) : alpha_fixed};
    };

    FitProblem problem;
    problem.residual = [&](const Vector &p) {
        const auto [eta, alpha] = unpack(p);
        Vector r(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const auto &pt = points[static_cast<std::size_t>(i)];
            const double g = amplifier_response(pt.peak_power_w, alpha, eta, pt.branch);
            r[i] = (in_db ? linear_to_db(g) : g) - data[i];
        }
        return r;
    };
    problem.jacobian = [&](const Vector &p) {
        const auto [eta, alpha] = unpack(p);
        Matrix jac(n, p.size());
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const auto &pt = points[static_cast<std::size_t>(i)];
            auto grad = amplifier_gradient(pt.peak_power_w, pt.branch, eta, alpha);
            if (in_db)
            {
                const double g = amplifier_response(pt.peak_power_w, alpha, eta, pt.branch);
                grad[0] *= db_per_neper / g;
                grad[1] *= db_per_neper / g;
            }
            jac(i, 0) = grad[0];
            if (free_alpha)
                jac(i, 1) = grad[1];
        }
        return jac;
    };
    problem.weights = weights;

    auto guess = initial_amplifier_guess(points);
    if (!free_alpha)
    {
        // eta from the largest anti-squeezing / amplification point with alpha known.
        double best = -1.0;
        for (const auto &pt : points)
        {
            if (pt.branch != Branch::plus || pt.peak_power_w <= best)
                continue;
            const double ex = std::exp(2.0 * std::sqrt(alpha_fixed * pt.peak_power_w)) - 1.0;
            if (ex > 0.0)
            {
                best = pt.peak_power_w;
                guess[0] = (db_to_linear(pt.value_db) - 1.0) / ex;
            }
        }
    }
    guess[0] = std::clamp(guess[0], 1e-3, 1.0);
    guess[1] = std::max(guess[1], alpha_floor);

    if (free_alpha)
    {
        problem.initial = Vector{{guess[0], guess[1]}};
        problem.bounds = Bounds{Vector{{0.0, alpha_floor}}, Vector{{1.0, INFINITY}}};
    }
    else
    {
        problem.initial = Vector{{guess[0]}};
        problem.bounds = Bounds{Vector{{0.0}}, Vector{{1.0}}};
    }

    CurveFit out;
    out.fit = levenberg_marquardt(problem, options.lm);
    out.eta = out.fit.params[0];
    out.eta_err = out.fit.std_errors[0];
    out.alpha_fixed = !free_alpha;
    if (free_alpha)
    {
        out.alpha_per_w = out.fit.params[1];
        out.alpha_err = out.fit.std_errors[1];
    }
    else
    {
        out.alpha_per_w = alpha_fixed;
    }
    return out;
}

CurveFit fit_gain_curve(std::span<const AmplifierPoint> points, const CurveFitOptions &options)
{
    CurveFitOptions opts = options;
    opts.fixed_alpha.reset();
    auto fit = fit_amplifier_curve(points, opts);
    ensure_converged(fit.fit, "gain-curve fit");
    return fit;
}

CurveFit fit_squeezing_curve(std::span<const AmplifierPoint> points, const CurveFitOptions &options)
{
    auto fit = fit_amplifier_curve(points, options);
    ensure_converged(fit.fit, "squeezing-curve fit");
    return fit;
}

double phase_model(double bin, const Vector &params)
{
    const double theta = params[2] * bin + params[3];
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return params[1] * s * s + params[0] * c * c;
}

Eigen::Vector4d phase_model_gradient(double bin, const Vector &params)
{
    const double theta = params[2] * bin + params[3];
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    // dV/dtheta = (S+ - S-) sin(2 theta)
    const double dtheta = (params[1] - params[0]) * 2.0 * s * c;
    return {c * c, s * s, dtheta * bin, dtheta};
}

} // namespace sqz
