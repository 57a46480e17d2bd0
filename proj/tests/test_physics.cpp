#include "sqz/error.hpp"
#include "sqz/physics.hpp"

#include <doctest.h>

#include <random>

using namespace sqz;
using doctest::Approx;

TEST_CASE("peak power from a pulse train")
{
    PulseTrain p;
    p.avg_power_w = 310e-6;
    CHECK(peak_power(p) == Approx(0.31).epsilon(1e-12));
    p.avg_power_w = 290e-6;
    CHECK(peak_power(p) == Approx(0.29).epsilon(1e-12));
    p.avg_power_w = 0.0;
    CHECK(peak_power(p) == 0.0);

    p.avg_power_w = 310e-6;
    p.shape_factor = shape::sech2;
    CHECK(peak_power(p) == Approx(0.31 * 0.8814).epsilon(1e-12));

    PulseTrain bad;
    bad.rep_rate_hz = 0.0;
    CHECK_THROWS_AS(peak_power(bad), Error);
    bad = PulseTrain{};
    bad.fwhm_s = -1e-12;
    CHECK_THROWS_AS(peak_power(bad), Error);
    bad = PulseTrain{};
    bad.shape_factor = 1.5;
    CHECK_THROWS_AS(peak_power(bad), Error);
}

TEST_CASE("parametric gain")
{
    const auto g = parametric_gain(0.29, 0.28, 0.95);
    CHECK(g.g_plus_db == Approx(2.379723768635219).epsilon(1e-12));
    CHECK(g.g_minus_db == Approx(-2.311427355398753).epsilon(1e-12));
    CHECK(g.g_plus_db == Approx(2.38).epsilon(0.005 / 2.38));
    CHECK(g.g_minus_db == Approx(-2.31).epsilon(0.005 / 2.31));
    CHECK(g.g_plus_lin == Approx(db_to_linear(g.g_plus_db)).epsilon(1e-14));
    CHECK(g.g_minus_lin == Approx(db_to_linear(g.g_minus_db)).epsilon(1e-14));

    for (double eta : {0.0, 0.3, 0.95, 1.0})
    {
        const auto z = parametric_gain(0.0, 0.28, eta);
        CHECK(z.g_plus_lin == 1.0);
        CHECK(z.g_minus_lin == 1.0);
        CHECK(z.g_plus_db == 0.0);
    }

    CHECK_THROWS_AS(parametric_gain(-0.1, 0.28, 0.95), Error);
    CHECK_THROWS_AS(parametric_gain(0.1, -0.28, 0.95), Error);
    CHECK_THROWS_AS(parametric_gain(0.1, 0.28, 1.01), Error);
}

TEST_CASE("gain of a pure amplifier preserves the area: G+ G- = 1")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> power(0.0, 3.0), alpha(0.0, 2.0);
    for (int i = 0; i < 1000; ++i)
    {
        const auto g = parametric_gain(power(gen), alpha(gen), 1.0);
        CHECK(g.g_plus_lin * g.g_minus_lin == Approx(1.0).epsilon(1e-12));
        CHECK(g.g_plus_lin >= 1.0);
        CHECK(g.g_minus_lin <= 1.0);
        CHECK(g.g_minus_lin > 0.0);
    }
}

TEST_CASE("squeezing levels")
{
    const auto s = squeezing_levels(0.31, 0.28, 0.22);
    CHECK(s.s_minus_db == Approx(-0.4477174220735515).epsilon(1e-12));
    CHECK(s.s_plus_db == Approx(0.7061949362453079).epsilon(1e-12));
    CHECK(s.s_minus_lin == Approx(0.9020451126064803).epsilon(1e-12));
    CHECK(s.s_plus_lin == Approx(1.176574667893994).epsilon(1e-12));
    CHECK(s.s_minus_db == Approx(-0.448).epsilon(0.0005 / 0.448));
    CHECK(s.s_plus_db == Approx(0.706).epsilon(0.0005 / 0.706));

    const auto lossy = squeezing_levels(0.31, 0.28, 0.0);
    CHECK(lossy.s_minus_lin == 1.0);
    CHECK(lossy.s_plus_lin == 1.0);
}

TEST_CASE("squeezing levels: monotone in power and impure under loss")
{
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> eta_d(0.01, 1.0), alpha_d(0.05, 2.0);
    for (int i = 0; i < 200; ++i)
    {
        const double eta = eta_d(gen), alpha = alpha_d(gen);
        SqueezingLevels prev = squeezing_levels(0.0, alpha, eta);
        for (double p = 0.01; p <= 1.0; p += 0.01)
        {
            const auto s = squeezing_levels(p, alpha, eta);
            CHECK(s.s_minus_lin < prev.s_minus_lin);
            CHECK(s.s_plus_lin > prev.s_plus_lin);
            CHECK(s.s_minus_lin > 0.0);
            CHECK(s.s_minus_lin <= 1.0);
            CHECK(s.s_plus_lin >= 1.0);
            if (eta < 1.0)
                CHECK(s.s_minus_lin * s.s_plus_lin > 1.0);
            prev = s;
        }
    }
    const auto pure = squeezing_levels(0.5, 0.7, 1.0);
    CHECK(pure.s_minus_lin * pure.s_plus_lin == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("electronic efficiency")
{
    CHECK(electronic_efficiency(8.0) == Approx(0.8415106807538887).epsilon(1e-12));
    CHECK(electronic_efficiency(8.0) == Approx(0.8415).epsilon(0.0005));
    CHECK(electronic_efficiency(std::numeric_limits<double>::infinity()) == 1.0);
    CHECK(electronic_efficiency(0.0) == 0.0);
    CHECK_THROWS_AS(electronic_efficiency(-1.0), Error);
}

TEST_CASE("visibility to efficiency")
{
    CHECK(visibility_to_efficiency(0.92) == Approx(0.8464).epsilon(1e-12));
    CHECK(visibility_to_efficiency(1.0) == 1.0);
    CHECK(visibility_to_efficiency(0.0) == 0.0);
    CHECK_THROWS_AS(visibility_to_efficiency(1.1), Error);
    CHECK_THROWS_AS(visibility_to_efficiency(-0.1), Error);
}

TEST_CASE("detection budget")
{
    DetectionBudget b;
    b.eta_waveguide = db_to_linear(-0.29);
    b.eta_optics = db_to_linear(-4.57);
    b.eta_visibility = 0.85;
    b.eta_quantum = 0.98;
    b.eta_electronic = 0.84;
    const auto t = budget_total(b);
    CHECK(t.linear == Approx(0.22852003792762676).epsilon(1e-12));
    CHECK(t.db == Approx(-6.410757125313308).epsilon(1e-12));
    CHECK(b.homodyne() == Approx(0.69972).epsilon(1e-12));

    const auto ones = budget_total(DetectionBudget{});
    CHECK(ones.linear == 1.0);
    CHECK(ones.db == 0.0);

    for (int field = 0; field < 5; ++field)
    {
        DetectionBudget z = b;
        double *f[] = {&z.eta_waveguide, &z.eta_optics, &z.eta_visibility, &z.eta_quantum, &z.eta_electronic};
        *f[field] = 0.0;
        CHECK(budget_total(z).linear == 0.0);
    }

    b.eta_optics = 1.2;
    CHECK_THROWS_AS(budget_total(b), Error);
}

TEST_CASE("on-chip inference")
{
    const double ext = db_to_linear(-6.12);
    CHECK(ext == Approx(0.2443430552693972).epsilon(1e-12));
    CHECK(infer_onchip_squeezing(-0.33, ext) == Approx(-1.5456504565344242).epsilon(1e-10));
    CHECK(infer_onchip_squeezing(-0.83, 1.0) == Approx(-0.83).epsilon(1e-12));
    CHECK(infer_onchip_squeezing(0.0, 0.3) == Approx(0.0).epsilon(1e-12));

    // Below the loss floor: 1 - 0.2 = 0.8 -> -0.97 dB.
    CHECK_THROWS_AS(infer_onchip_squeezing(-1.0, 0.2), UnphysicalError);
    try
    {
        infer_onchip_squeezing(-3.0, 0.2);
    }
    catch (const Error &e)
    {
        CHECK(e.code() == ErrorCode::unphysical);
    }
    CHECK_THROWS_AS(infer_onchip_squeezing(-0.3, 0.0), Error);
}

TEST_CASE("inference undoes the loss channel")
{
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> s_d(-15.0, 15.0), eta_d(0.01, 1.0);
    for (int i = 0; i < 5000; ++i)
    {
        const double s = s_d(gen), eta = i == 0 ? 1.0 : eta_d(gen);
        const double measured = apply_loss_db(s, eta);
        CHECK(infer_onchip_squeezing(measured, eta) == Approx(s).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("dB round trips")
{
    std::mt19937_64 gen(14);
    std::uniform_real_distribution<double> db(-60.0, 60.0);
    for (int i = 0; i < 5000; ++i)
    {
        const double x = db(gen);
        CHECK(linear_to_db(db_to_linear(x)) == Approx(x).epsilon(1e-12).scale(1.0));
        const double lin = db_to_linear(x);
        CHECK(db_to_linear(linear_to_db(lin)) == Approx(lin).epsilon(1e-12));
    }
}

TEST_CASE("efficiency scaling with length")
{
    CHECK(normalized_to_total_efficiency(127.0, 0.47) == Approx(28.0543).epsilon(1e-12));
    CHECK(normalized_to_total_efficiency(1070.0, 0.47) == Approx(236.363).epsilon(1e-12));
    CHECK(normalized_to_total_efficiency(127.0, 0.0) == 0.0);
    CHECK(WaveguideParams{}.alpha_per_w() == Approx(0.280543).epsilon(1e-12));
    CHECK_THROWS_AS(normalized_to_total_efficiency(-1.0, 0.47), Error);
}

TEST_CASE("waveguide invariants")
{
    WaveguideParams w;
    CHECK_NOTHROW(w.validate());
    CHECK(w.propagation_loss_db() == Approx(0.282).epsilon(1e-12));
    w.length_m = 0.0;
    CHECK_THROWS_AS(w.validate(), Error);
    w = WaveguideParams{};
    w.prop_loss_db_per_cm = -0.1;
    CHECK_THROWS_AS(w.validate(), Error);
}
