#ifndef SQZ_FIT_HPP
#define SQZ_FIT_HPP

// Damped Gauss-Newton (Levenberg-Marquardt) least squares with covariance-based
// uncertainties, plus the amplifier-law fits for gain and squeezing data.

#include "sqz/physics.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>

namespace sqz
{

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ResidualFn = std::function<Vector(const Vector &)>;
using JacobianFn = std::function<Matrix(const Vector &)>;

struct Bounds
{
    Vector lower;
    Vector upper;

    Vector project(const Vector &p) const { return p.cwiseMax(lower).cwiseMin(upper); }
};

/// Minimises sum_i w_i r_i(p)^2. An empty jacobian selects central differences.
struct FitProblem
{
    ResidualFn residual;
    JacobianFn jacobian;
    Vector initial;
    Vector weights; // empty -> all ones
    std::optional<Bounds> bounds;

    void validate(Eigen::Index n_residuals) const;
};

struct FitOptions
{
    double tol = 1e-10;      // relative SSE change and relative step
    double grad_tol = 1e-10; // infinity norm of J^T W r
    int max_iter = 200;
    double lambda0 = 1e-3;
};

struct FitResult
{
    Vector params;
    Matrix covariance;
    Vector std_errors;
    double sse = 0.0;           // weighted
    int iterations = 0;         // Jacobian evaluations
    int accepted_steps = 0;
    bool converged = false;
    double condition = 0.0;     // of J^T W J at the solution
    std::string message;
};

/// Central differences with h = max(1e-7, 1e-7 |p_j|).
Matrix finite_difference_jacobian(const ResidualFn &residual, const Vector &params);

/// Throws Error(singular) when J^T W J is not invertible at the solution.
/// Non-convergence is reported through FitResult::converged.
FitResult levenberg_marquardt(const FitProblem &problem, const FitOptions &options = {});

/// Throws Error(not_converged) quoting the final residual.
void ensure_converged(const FitResult &r, const std::string &what);

// ---------------------------------------------------------------------------
// Amplifier-law fits: y = eta exp(+-2 sqrt(alpha P)) + 1 - eta

struct AmplifierPoint
{
    double peak_power_w = 0.0;
    double value_db = 0.0;
    Branch branch = Branch::plus;
    double sigma_db = 0.0; // <= 0: unknown; all points then get equal weight
};

enum class DataSpace
{
    linear,
    decibel,
};

struct CurveFitOptions
{
    std::optional<double> fixed_alpha; // set -> fit eta only
    DataSpace space = DataSpace::linear;
    FitOptions lm;
};

struct CurveFit
{
    FitResult fit;
    double eta = 0.0;
    double eta_err = 0.0;
    double alpha_per_w = 0.0;
    double alpha_err = 0.0;
    bool alpha_fixed = false;
};

/// d/d(eta), d/d(alpha) of the linear amplifier law.
std::array<double, 2> amplifier_gradient(double peak_power_w, Branch branch, double eta, double alpha_per_w);

/// Initial (eta, alpha) from the highest-power +/- pair, falling back to the small-signal slope.
std::array<double, 2> initial_amplifier_guess(std::span<const AmplifierPoint> points);

CurveFit fit_amplifier_curve(std::span<const AmplifierPoint> points, const CurveFitOptions &options);

/// Joint fit of both gain branches over (eta_mm, alpha).
CurveFit fit_gain_curve(std::span<const AmplifierPoint> points, const CurveFitOptions &options = {});

/// Fit of squeezing / anti-squeezing over eta, with alpha fixed unless options says otherwise.
CurveFit fit_squeezing_curve(std::span<const AmplifierPoint> points, const CurveFitOptions &options);

// ---------------------------------------------------------------------------
// Phase curve: V(bin) = S+ sin^2(a bin + b) + S- cos^2(a bin + b), params (S-, S+, a, b)

double phase_model(double bin, const Vector &params);
Eigen::Vector4d phase_model_gradient(double bin, const Vector &params);

} // namespace sqz

#endif // SQZ_FIT_HPP
