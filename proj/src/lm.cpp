#include "sqz/error.hpp"
#include "sqz/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace sqz
{

void FitProblem::validate(Eigen::Index n_residuals) const
{
    require(static_cast<bool>(residual), "fit problem needs a residual function");
    require(initial.size() > 0, "fit problem needs at least one parameter");
    require(n_residuals >= initial.size(), "fit needs at least as many residuals as parameters");
    require(initial.allFinite(), "initial parameters must be finite");
    if (weights.size() > 0)
    {
        require(weights.size() == n_residuals, "one weight per residual required");
        require((weights.array() > 0.0).all() && weights.allFinite(), "weights must be positive and finite");
    }
    if (bounds)
    {
        require(bounds->lower.size() == initial.size() && bounds->upper.size() == initial.size(),
                "bounds must match the parameter count");
        require((bounds->lower.array() <= initial.array()).all() &&
                    (initial.array() <= bounds->upper.array()).all(),
                "initial parameters must lie within bounds");
    }
}

Matrix finite_difference_jacobian(const ResidualFn &residual, const Vector &params)
{
    const Vector r0 = residual(params);
    Matrix jac(r0.size(), params.size());
    Vector p = params;
    for (Eigen::Index j = 0; j < params.size(); ++j)
    {
        const double h = std::max(1e-7, 1e-7 * std::abs(params[j]));
        p[j] = params[j] + h;
        const Vector up = residual(p);
        p[j] = params[j] - h;
        const Vector down = residual(p);
        p[j] = params[j];
        jac.col(j) = (up - down) / (2.0 * h);
    }
    return jac;
}

namespace
{

double weighted_sse(const Vector &r, const Vector &w) { return (w.array() * r.array().square()).sum(); }

} // namespace

FitResult levenberg_marquardt(const FitProblem &problem, const FitOptions &options)
{
    Vector p = problem.initial;
    Vector r = problem.residual(p);
    problem.validate(r.size());
    require(r.allFinite(), "residual is not finite at the initial parameters");

    const Eigen::Index n = r.size();
    const Eigen::Index m = p.size();
    const Vector w = problem.weights.size() > 0 ? problem.weights : Vector::Ones(n);
    auto jacobian = [&](const Vector &x) {
        return problem.jacobian ? problem.jacobian(x) : finite_difference_jacobian(problem.residual, x);
    };
    auto project = [&](const Vector &x) { return problem.bounds ? problem.bounds->project(x) : x; };

    FitResult out;
    double sse = weighted_sse(r, w);
    double lambda = options.lambda0;
    Matrix jac;

    while (out.iterations < options.max_iter)
    {
        jac = jacobian(p);
        ++out.iterations;
        const Matrix jtw = jac.transpose() * w.asDiagonal();
        const Matrix normal = jtw * jac;
        Vector grad = jtw * r;

        // Parameters held at a bound by an outward gradient drop out of the step.
        std::vector<bool> frozen(static_cast<std::size_t>(m), false);
        if (problem.bounds)
            for (Eigen::Index j = 0; j < m; ++j)
                if ((p[j] <= problem.bounds->lower[j] && grad[j] > 0.0) ||
                    (p[j] >= problem.bounds->upper[j] && grad[j] < 0.0))
                {
                    frozen[static_cast<std::size_t>(j)] = true;
                    grad[j] = 0.0;
                }

        if (sse == 0.0 || grad.lpNorm<Eigen::Infinity>() < options.grad_tol)
        {
            out.converged = true;
            out.message = "gradient below tolerance";
            break;
        }

        Vector damping = normal.diagonal().cwiseMax(1e-12 * std::max(1.0, normal.diagonal().maxCoeff()));
        bool accepted = false;
        while (!accepted)
        {
            Matrix damped = normal;
            damped.diagonal() += lambda * damping;
            for (Eigen::Index j = 0; j < m; ++j)
                if (frozen[static_cast<std::size_t>(j)])
                {
                    damped.row(j).setZero();
                    damped.col(j).setZero();
                    damped(j, j) = 1.0;
                }
            const Vector step = damped.ldlt().solve(-grad);
            const Vector trial = project(p + step);
            const Vector r_trial = problem.residual(trial);
            const double sse_trial = r_trial.allFinite() ? weighted_sse(r_trial, w) : INFINITY;

            // Within rounding of the current SSE, a smaller gradient decides.
            bool downhill = sse_trial < sse;
            if (!downhill && sse_trial <= sse * (1.0 + 64.0 * std::numeric_limits<double>::epsilon()))
            {
                Vector g_trial = jacobian(trial).transpose() * w.asDiagonal() * r_trial;
                for (Eigen::Index j = 0; j < m; ++j)
                    if (frozen[static_cast<std::size_t>(j)])
                        g_trial[j] = 0.0;
                downhill = g_trial.norm() < 0.5 * grad.norm();
            }

            if (downhill)
            {
                const double drop = std::max(sse - sse_trial, 0.0);
                p = trial;
                r = r_trial;
                const double previous = sse;
                sse = sse_trial;
                lambda = std::max(lambda / 10.0, 1e-15);
                ++out.accepted_steps;
                accepted = true;
                const double moved = step.norm() / (p.norm() + options.tol);
                if ((drop <= options.tol * previous && moved <= options.tol) || sse == 0.0)
                {
                    out.converged = true;
                    out.message = "relative SSE change and step below tolerance";
                }
            }
            else
            {
                lambda *= 10.0;
                if (lambda > 1e16)
                {
                    // No downhill step exists at working precision.
                    out.converged = true;
                    out.message = "no further decrease at machine precision";
                    break;
                }
            }
        }
        if (out.converged)
        {
            jac = jacobian(p);
            break;
        }
    }
    if (!out.converged)
    {
        std::ostringstream msg;
        msg << "maximum iterations (" << options.max_iter << ") exceeded; final weighted SSE " << sse;
        out.message = msg.str();
    }

    out.params = p;
    out.sse = sse;

    const Matrix normal = jac.transpose() * w.asDiagonal() * jac;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(normal);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    out.condition = lmin > 0.0 ? lmax / lmin : INFINITY;
    if (!(lmin > 1e-14 * lmax))
    {
        std::ostringstream msg;
        msg << "singular normal equations at the solution (condition estimate " << out.condition << ")";
        throw Error(ErrorCode::singular, msg.str());
    }

    const double dof = static_cast<double>(std::max<Eigen::Index>(n - m, 1));
    out.covariance = (sse / dof) * eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
                     eig.eigenvectors().transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
    out.std_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

void ensure_converged(const FitResult &r, const std::string &what)
{
    if (!r.converged)
        throw Error(ErrorCode::not_converged, what + " did not converge: " + r.message);
}

} // namespace sqz
