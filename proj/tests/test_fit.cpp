#include "sqz/error.hpp"
#include "sqz/fit.hpp"
#include "sqz/physics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace sqz;
using doctest::Approx;

namespace
{

std::vector<AmplifierPoint> gain_points(double eta, double alpha, double sigma_db, std::mt19937_64 *gen,
                                        std::size_t n_powers = 8, double p_max = 0.29)
{
    std::normal_distribution<double> noise(0.0, sigma_db);
    std::vector<AmplifierPoint> pts;
    for (std::size_t i = 1; i <= n_powers; ++i)
    {
        const double p = p_max * static_cast<double>(i) / static_cast<double>(n_powers);
        for (Branch b : {Branch::plus, Branch::minus})
        {
            double db = linear_to_db(amplifier_response(p, alpha, eta, b));
            if (gen)
                db += noise(*gen);
            pts.push_back({p, db, b, sigma_db});
        }
    }
    return pts;
}

bool close_rel(double analytic, double numeric, double rel, double floor)
{
    return std::abs(analytic - numeric) <= rel * std::max({std::abs(analytic), std::abs(numeric), floor});
}

double sample_std(const std::vector<double> &v)
{
    double m = 0.0;
    for (double x : v)
        m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace

TEST_CASE("LM: linear model on exact data")
{
    const Vector x = Vector::LinSpaced(20, 0.0, 5.0);
    const Vector y = 2.5 * x;
    FitProblem p;
    p.residual = [&](const Vector &a) { return Vector(a[0] * x - y); };
    p.initial = Vector{{0.1}};
    const auto r = levenberg_marquardt(p);
    CHECK(r.converged);
    CHECK(r.params[0] == Approx(2.5).epsilon(1e-12));
    CHECK(r.sse < 1e-20);
    CHECK(r.accepted_steps <= 4);
}

TEST_CASE("LM: linear least squares reaches the normal-equation solution in three steps")
{
    std::mt19937_64 gen(5);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial)
    {
        const Eigen::Index n = 40, m = 1 + trial % 5;
        Matrix a(n, m);
        Vector y(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            for (Eigen::Index j = 0; j < m; ++j)
                a(i, j) = nd(gen);
            y[i] = nd(gen);
            w[i] = 0.5 + std::abs(nd(gen));
        }
        const Vector solution = (a.transpose() * w.asDiagonal() * a).ldlt().solve(a.transpose() * w.asDiagonal() * y);

        FitProblem p;
        p.residual = [&](const Vector &c) { return Vector(a * c - y); };
        p.jacobian = [&](const Vector &) { return a; };
        p.weights = w;
        p.initial = Vector::Constant(m, 3.0);
        FitOptions opt;
        opt.max_iter = 3;
        const auto r = levenberg_marquardt(p, opt);
        CHECK(r.accepted_steps <= 3);
        CHECK((r.params - solution).norm() <= 1e-10 * std::max(1.0, solution.norm()));
    }
}

TEST_CASE("LM: bounds are enforced by projection")
{
    const Vector x = Vector::LinSpaced(10, 0.0, 1.0);
    const Vector y = -1.0 * x;
    FitProblem p;
    p.residual = [&](const Vector &a) { return Vector(a[0] * x + Vector::Constant(10, a[1]) - y); };
    p.initial = Vector{{0.5, 0.0}};
    p.bounds = Bounds{Vector{{0.0, -10.0}}, Vector{{1.0, 10.0}}};
    const auto r = levenberg_marquardt(p);
    CHECK(r.params[0] == 0.0);
    CHECK(r.params[1] == Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("LM: singular and invalid problems")
{
    const Vector x = Vector::LinSpaced(10, 0.0, 1.0);
    FitProblem p;
    // Only a + b is identifiable.
    p.residual = [&](const Vector &a) { return Vector((a[0] + a[1]) * x - 2.0 * x); };
    p.initial = Vector{{0.3, 0.2}};
    try
    {
        levenberg_marquardt(p);
        FAIL("expected a singular-matrix error");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::singular);
        CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }

    FitProblem too_few;
    too_few.residual = [](const Vector &a) { return Vector(a.head(1)); };
    too_few.initial = Vector{{1.0, 2.0}};
    CHECK_THROWS_AS(levenberg_marquardt(too_few), Error);

    FitProblem bad_w;
    bad_w.residual = [&](const Vector &a) { return Vector(a[0] * x); };
    bad_w.initial = Vector{{1.0}};
    bad_w.weights = Vector::Zero(10);
    CHECK_THROWS_AS(levenberg_marquardt(bad_w), Error);

    FitProblem outside;
    outside.residual = [&](const Vector &a) { return Vector(a[0] * x); };
    outside.initial = Vector{{2.0}};
    outside.bounds = Bounds{Vector{{0.0}}, Vector{{1.0}}};
    CHECK_THROWS_AS(levenberg_marquardt(outside), Error);
}

TEST_CASE("LM: iteration cap reports the final residual")
{
    // Rosenbrock from the usual start needs more than three iterations.
    FitProblem p;
    p.residual = [](const Vector &a) { return Vector{{10.0 * (a[1] - a[0] * a[0]), 1.0 - a[0]}}; };
    p.initial = Vector{{-1.2, 1.0}};
    FitOptions opt;
    opt.max_iter = 3;
    const auto r = levenberg_marquardt(p, opt);
    CHECK_FALSE(r.converged);
    CHECK(r.message.find("SSE") != std::string::npos);
    try
    {
        ensure_converged(r, "rosenbrock");
        FAIL("expected non-convergence");
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::not_converged);
    }

    const auto full = levenberg_marquardt(p);
    CHECK(full.converged);
    CHECK(full.params[0] == Approx(1.0).epsilon(1e-6));
    CHECK(full.params[1] == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("finite-difference Jacobian")
{
    const ResidualFn f = [](const Vector &a) { return Vector{{a[0] * a[0], std::sin(a[1]), a[0] * a[1]}}; };
    const Vector p{{1.5, 0.3}};
    const Matrix j = finite_difference_jacobian(f, p);
    CHECK(j(0, 0) == Approx(3.0).epsilon(1e-8));
    CHECK(j(1, 1) == Approx(std::cos(0.3)).epsilon(1e-8));
    CHECK(j(2, 0) == Approx(0.3).epsilon(1e-8));
    CHECK(j(2, 1) == Approx(1.5).epsilon(1e-8));
    CHECK(j(0, 1) == 0.0);
}

TEST_CASE("analytic model gradients agree with finite differences")
{
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> eta_d(0.0, 1.0), alpha_d(0.01, 2.0), p_d(0.0, 1.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double eta = eta_d(gen), alpha = alpha_d(gen), power = p_d(gen);
        for (Branch b : {Branch::plus, Branch::minus})
        {
            const auto g = amplifier_gradient(power, b, eta, alpha);
            const ResidualFn f = [&](const Vector &q) {
                return Vector{{amplifier_response(power, q[1], q[0], b)}};
            };
            const Matrix fd = finite_difference_jacobian(f, Vector{{eta, alpha}});
            CHECK(close_rel(g[0], fd(0, 0), 1e-6, 1e-2));
            CHECK(close_rel(g[1], fd(0, 1), 1e-6, 1e-2));
        }
    }

    std::uniform_real_distribution<double> s_d(0.1, 3.0), a_d(0.0, 0.2), b_d(0.0, std::numbers::pi);
    std::uniform_int_distribution<int> bin_d(0, 99);
    for (int i = 0; i < 1000; ++i)
    {
        const Vector q{{s_d(gen), s_d(gen), a_d(gen), b_d(gen)}};
        const double bin = bin_d(gen);
        const auto g = phase_model_gradient(bin, q);
        const ResidualFn f = [&](const Vector &x) { return Vector{{phase_model(bin, x)}}; };
        const Matrix fd = finite_difference_jacobian(f, q);
        for (int j = 0; j < 4; ++j)
            CHECK(close_rel(g[j], fd(0, j), 1e-6, 1e-2));
    }
}

TEST_CASE("gain fit recovers noiseless parameters")
{
    const auto pts = gain_points(0.95, 0.28, 0.0, nullptr);
    const auto fit = fit_gain_curve(pts);
    CHECK(fit.eta == Approx(0.95).epsilon(1e-6));
    CHECK(fit.alpha_per_w == Approx(0.28).epsilon(1e-6));
    CHECK_FALSE(fit.alpha_fixed);

    CurveFitOptions db;
    db.space = DataSpace::decibel;
    const auto fit_db = fit_gain_curve(pts, db);
    CHECK(fit_db.eta == Approx(0.95).epsilon(1e-6));
    CHECK(fit_db.alpha_per_w == Approx(0.28).epsilon(1e-6));

    // A fixed alpha passed to the gain fit is ignored: both parameters float.
    CurveFitOptions fixed;
    fixed.fixed_alpha = 0.5;
    CHECK(fit_gain_curve(pts, fixed).alpha_per_w == Approx(0.28).epsilon(1e-6));
}

TEST_CASE("initial guesses")
{
    const auto pts = gain_points(0.95, 0.28, 0.0, nullptr);
    const auto g = initial_amplifier_guess(pts);
    CHECK(g[0] == Approx(0.95).epsilon(1e-9));
    CHECK(g[1] == Approx(0.28).epsilon(1e-9));

    // Without a +/- pair the small-signal slope is used.
    std::vector<AmplifierPoint> plus_only;
    for (const auto &p : pts)
        if (p.branch == Branch::plus)
            plus_only.push_back(p);
    const auto s = initial_amplifier_guess(plus_only);
    CHECK(s[0] > 0.0);
    CHECK(s[1] > 0.0);
}

TEST_CASE("squeezing fit with alpha fixed and free")
{
    std::vector<AmplifierPoint> pts;
    for (double p : {0.05, 0.1, 0.15, 0.2, 0.25, 0.31})
        for (Branch b : {Branch::plus, Branch::minus})
            pts.push_back({p, linear_to_db(amplifier_response(p, 0.28, 0.22, b)), b, 0.0});

    CurveFitOptions fixed;
    fixed.fixed_alpha = 0.28;
    const auto f = fit_squeezing_curve(pts, fixed);
    CHECK(f.alpha_fixed);
    CHECK(f.alpha_per_w == 0.28);
    CHECK(f.eta == Approx(0.22).epsilon(1e-8));
    CHECK(f.fit.params.size() == 1);

    const auto free = fit_squeezing_curve(pts, CurveFitOptions{});
    CHECK(free.eta == Approx(0.22).epsilon(1e-6));
    CHECK(free.alpha_per_w == Approx(0.28).epsilon(1e-6));

    CHECK_THROWS_AS(fit_squeezing_curve(std::vector<AmplifierPoint>{}, fixed), Error);
    fixed.fixed_alpha = -1.0;
    CHECK_THROWS_AS(fit_squeezing_curve(pts, fixed), Error);
}

TEST_CASE("linear and dB data spaces agree within one standard error")
{
    std::mt19937_64 gen(31);
    for (int rep = 0; rep < 20; ++rep)
    {
        const auto pts = gain_points(0.95, 0.28, 0.02, &gen);
        CurveFitOptions lin, db;
        db.space = DataSpace::decibel;
        const auto a = fit_gain_curve(pts, lin);
        const auto b = fit_gain_curve(pts, db);
        CHECK(std::abs(a.eta - b.eta) <= std::hypot(a.eta_err, b.eta_err));
        CHECK(std::abs(a.alpha_per_w - b.alpha_per_w) <= std::hypot(a.alpha_err, b.alpha_err));
    }
}

TEST_CASE("covariance matches the replica spread")
{
    std::mt19937_64 gen(41);
    std::vector<double> etas, alphas;
    double eta_err = 0.0, alpha_err = 0.0;
    const int n = 200;
    for (int rep = 0; rep < n; ++rep)
    {
        const auto fit = fit_gain_curve(gain_points(0.95, 0.28, 0.02, &gen));
        etas.push_back(fit.eta);
        alphas.push_back(fit.alpha_per_w);
        eta_err += fit.eta_err / n;
        alpha_err += fit.alpha_err / n;
    }
    CHECK(sample_std(etas) / eta_err == Approx(1.0).epsilon(0.2));
    CHECK(sample_std(alphas) / alpha_err == Approx(1.0).epsilon(0.2));
}

TEST_CASE("covariance is symmetric positive semidefinite")
{
    std::mt19937_64 gen(51);
    const auto fit = fit_gain_curve(gain_points(0.9, 0.3, 0.02, &gen));
    const Matrix &c = fit.fit.covariance;
    CHECK((c - c.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    CHECK(eig.eigenvalues().minCoeff() >= 0.0);
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        CHECK(fit.fit.std_errors[i] == Approx(std::sqrt(c(i, i))).epsilon(1e-14));
}
