#include "sqz/dsp.hpp"
#include "sqz/error.hpp"
#include "sqz/rng.hpp"
#include "sqz/synth.hpp"
#include "sqz/trace_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>

using namespace sqz;
using doctest::Approx;
namespace fs = std::filesystem;

namespace
{

double series_variance(const std::vector<double> &v)
{
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

fs::path scratch(const std::string &name)
{
    const auto dir = fs::temp_directory_path() / ("sqz_test_synth_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("raised-cosine kernel")
{
    for (std::size_t w : {1u, 2u, 10u, 33u})
    {
        const auto k = raised_cosine_kernel(w);
        double n2 = 0.0;
        for (double v : k)
            n2 += v * v;
        CHECK(n2 == Approx(1.0).epsilon(1e-14));
        for (std::size_t i = 0; i < w; ++i)
            CHECK(k[i] == Approx(k[w - 1 - i]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(raised_cosine_kernel(0), Error);
}

TEST_CASE("acquisition defaults and validation")
{
    AcquisitionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.samples_per_pulse() == 10);
    CHECK(cfg.n_pulses() == 500'000);
    CHECK(cfg.electronic_variance() == Approx(0.15848931924611134).epsilon(1e-12));

    auto bad = cfg;
    bad.sample_rate_hz = 1'050'000'000;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.n_samples = 5'000'005;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.pulse_kernel = std::vector<double>(10, 0.5);
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.pulse_kernel = std::vector<double>(9, 1.0 / 3.0);
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.lo_clearance_db = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("shot trace integrates to unit variance")
{
    AcquisitionConfig cfg;
    const auto t = synthesize_trace(cfg, 0.5, 3.0, TraceKind::shot, 0);
    CHECK(t.samples.size() == cfg.n_samples);
    CHECK(t.kind == TraceKind::shot);
    const auto q = integrate_pulses(t, t.kernel);
    CHECK(q.count() == 500'000);
    CHECK(series_variance(q.values) == Approx(1.0).epsilon(0.002));
}

TEST_CASE("electronic trace sits clearance below shot noise")
{
    AcquisitionConfig cfg;
    const auto t = synthesize_trace(cfg, 1.0, 1.0, TraceKind::electronic, 1);
    const auto q = integrate_pulses(t, t.kernel);
    CHECK(series_variance(q.values) == Approx(0.1585).epsilon(0.002 / 0.1585));
}

TEST_CASE("squeezed trace: phase average equals the mean of S+ and S-")
{
    AcquisitionConfig cfg;
    const double sm = 0.9020451126064803, sp = 1.176574667893994;
    for (std::uint64_t index : {2u, 3u, 4u})
    {
        const auto t = synthesize_trace(cfg, sm, sp, TraceKind::squeezed, index);
        const auto q = integrate_pulses(t, t.kernel);
        const double n = static_cast<double>(q.count());
        double mean_sq = 0.0, var_of_sq = 0.0;
        for (std::size_t k = 0; k < q.count(); ++k)
        {
            mean_sq += q.values[k] * q.values[k];
            const double v = quadrature_variance(2.0 * std::numbers::pi * static_cast<double>(k) / n, sm, sp);
            var_of_sq += 2.0 * v * v;
        }
        mean_sq /= n;
        const double se = std::sqrt(var_of_sq) / n;
        CHECK(std::abs(mean_sq - 0.5 * (sm + sp)) < 3.0 * se);
    }
}

TEST_CASE("squeezed variance swings between S- and S+ along the ramp")
{
    AcquisitionConfig cfg;
    const double sm = 0.9020451126064803, sp = 1.176574667893994;
    const auto t = synthesize_trace(cfg, sm, sp, TraceKind::squeezed, 5);
    const auto v = process_trace(t, 5000);
    REQUIRE(v.size() == 100);
    // Ramp 0 -> 2 pi: theta = 0 and pi give S-, pi/2 and 3 pi/2 give S+.
    const double rel = 3.0 * std::sqrt(2.0 / 4999.0);
    CHECK(v.bins[0].variance == Approx(sm).epsilon(rel));
    CHECK(v.bins[50].variance == Approx(sm).epsilon(rel));
    CHECK(v.bins[25].variance == Approx(sp).epsilon(rel));
    CHECK(v.bins[75].variance == Approx(sp).epsilon(rel));
}

TEST_CASE("noiseless electronics: integration recovers each pulse amplitude")
{
    AcquisitionConfig cfg;
    cfg.n_samples = 200'000;
    cfg.lo_clearance_db = std::numeric_limits<double>::infinity();
    const double sm = 0.5, sp = 2.0;
    const auto t = synthesize_trace(cfg, sm, sp, TraceKind::squeezed, 9);
    const auto q = integrate_pulses(t, t.kernel);

    // Replay the generator: one draw for the pulse, then one per sample.
    CounterRng rng(derive_seed(cfg.seed, 9));
    const std::size_t w = cfg.samples_per_pulse();
    const double n = static_cast<double>(cfg.n_pulses());
    for (std::size_t k = 0; k < cfg.n_pulses(); ++k)
    {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
        const double x = std::sqrt(quadrature_variance(theta, sm, sp)) * rng.normal();
        for (std::size_t i = 0; i < w; ++i)
            rng.normal();
        CHECK(q.values[k] == Approx(x).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("synthesis is deterministic per trace index")
{
    AcquisitionConfig cfg;
    cfg.n_samples = 100'000;
    const auto a = synthesize_trace(cfg, 0.9, 1.2, TraceKind::squeezed, 3);
    const auto b = synthesize_trace(cfg, 0.9, 1.2, TraceKind::squeezed, 3);
    const auto c = synthesize_trace(cfg, 0.9, 1.2, TraceKind::squeezed, 4);
    CHECK(a.samples == b.samples);
    CHECK(a.seed == derive_seed(cfg.seed, 3));
    CHECK(a.samples != c.samples);

    cfg.seed += 1;
    const auto d = synthesize_trace(cfg, 0.9, 1.2, TraceKind::squeezed, 3);
    CHECK(a.samples != d.samples);
}

TEST_CASE("squeezing below the electronic floor is refused")
{
    AcquisitionConfig cfg;
    cfg.n_samples = 1000;
    CHECK_THROWS_AS(synthesize_trace(cfg, 0.1, 2.0, TraceKind::squeezed), Error);
    CHECK_NOTHROW(synthesize_trace(cfg, 0.1, 2.0, TraceKind::shot));
    CHECK_THROWS_AS(synthesize_trace(cfg, std::nan(""), 2.0, TraceKind::squeezed), Error);
}

TEST_CASE("counter generator")
{
    CounterRng a(123), b(123);
    for (int i = 0; i < 100; ++i)
        CHECK(a.next_u64() == b.next_u64());
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));

    CounterRng g(99);
    double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
    int tail = 0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i)
    {
        const double x = g.normal();
        sum += x;
        sum2 += x * x;
        sum4 += x * x * x * x;
        tail += std::abs(x) > 3.0;
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(sum2 / n == Approx(1.0).epsilon(4.0 * std::sqrt(2.0 / n)));
    CHECK(sum4 / n == Approx(3.0).epsilon(4.0 * std::sqrt(96.0 / n) / 3.0));
    // P(|x| > 3) = 0.0026998
    CHECK(std::abs(tail - 2699.8) < 4.0 * std::sqrt(2699.8));

    CounterRng r1(7), r2(7);
    r2.normal();
    const auto used = r2.next_u64();
    r1.normal();
    CHECK(r1.next_u64() == used);

    CounterRng u(5);
    for (int i = 0; i < 10000; ++i)
    {
        const double x = u.uniform_open0();
        CHECK(x > 0.0);
        CHECK(x <= 1.0);
    }
}

TEST_CASE("power sweep writes sets in order with a manifest")
{
    const auto dir = scratch("sweep");
    SweepRequest req;
    req.acquisition.n_samples = 20'000;
    req.acquisition.n_traces = 2;
    req.avg_powers_w = {100e-6, 310e-6};
    req.alpha_per_w = 0.28;
    req.eta_total = 0.22;

    const auto files = synthesize_power_sweep(req, dir, 2);
    REQUIRE(files.size() == 8);
    CHECK(files[0].entry.path == "squeezed_p0_t0.sqzt");
    CHECK(files[3].entry.path == "squeezed_p1_t1.sqzt");
    CHECK(files[3].entry.avg_power_w == 310e-6);
    CHECK(files[4].entry.kind == TraceKind::shot);
    CHECK(files[7].entry.kind == TraceKind::electronic);

    const auto manifest = read_manifest(dir / "manifest.json");
    REQUIRE(manifest.size() == files.size());
    for (std::size_t i = 0; i < files.size(); ++i)
    {
        CHECK(manifest[i].path == files[i].entry.path);
        CHECK(manifest[i].kind == files[i].entry.kind);
        CHECK(files[i].sha256 == sha256_file(dir / files[i].entry.path));
    }

    // Trace indices run over the whole sweep.
    const auto t5 = read_trace(dir / files[5].entry.path);
    CHECK(t5.seed == derive_seed(req.acquisition.seed, 5));

    // A serial run gives identical files.
    const auto serial_dir = scratch("sweep_serial");
    const auto serial = synthesize_power_sweep(req, serial_dir, 1);
    for (std::size_t i = 0; i < files.size(); ++i)
        CHECK(serial[i].sha256 == files[i].sha256);

    req.avg_powers_w.clear();
    CHECK_THROWS_AS(synthesize_power_sweep(req, dir, 1), Error);
    req.avg_powers_w = {-1.0};
    CHECK_THROWS_AS(synthesize_power_sweep(req, dir, 1), Error);

    fs::remove_all(dir);
    fs::remove_all(serial_dir);
}
