#ifndef SQZ_SYNTH_HPP
#define SQZ_SYNTH_HPP

// Synthetic time-domain homodyne traces: one Gaussian quadrature draw per pulse,
// spread over the pulse window by a unit-norm kernel, plus white electronic noise.
//
// Variances are in shot-noise units after integration. The squeezed levels passed
// in are the as-measured ones (electronic noise included), so an integrated shot
// trace has variance 1 and an electronic-only trace 10^(-clearance/10).

#include "sqz/physics.hpp"

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sqz
{

enum class TraceKind : std::uint8_t
{
    squeezed = 0,
    shot = 1,
    electronic = 2,
};

const char *to_string(TraceKind kind);
TraceKind parse_trace_kind(std::string_view name);

/// Hann-shaped window over `width` samples, scaled to unit L2 norm.
std::vector<double> raised_cosine_kernel(std::size_t width);

struct AcquisitionConfig
{
    std::uint64_t sample_rate_hz = 1'000'000'000;
    std::uint64_t rep_rate_hz = 100'000'000;
    std::uint64_t n_samples = 5'000'000;
    std::uint32_t n_traces = 18;
    double lo_clearance_db = 8.0;
    double ramp_start_rad = 0.0;
    double ramp_end_rad = 2.0 * std::numbers::pi;
    std::vector<double> pulse_kernel; // empty -> raised_cosine_kernel(samples_per_pulse())
    std::uint64_t seed = 20220801;

    void validate() const;

    std::size_t samples_per_pulse() const { return static_cast<std::size_t>(sample_rate_hz / rep_rate_hz); }
    std::size_t n_pulses() const { return static_cast<std::size_t>(n_samples) / samples_per_pulse(); }
    std::vector<double> kernel() const;

    /// Integrated electronic-noise variance relative to shot noise.
    double electronic_variance() const;
};

struct HomodyneTrace
{
    TraceKind kind = TraceKind::shot;
    std::uint64_t sample_rate_hz = 0;
    std::uint64_t rep_rate_hz = 0;
    double ramp_start_rad = 0.0;
    double ramp_end_rad = 0.0;
    double clearance_db = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> kernel;
    std::vector<float> samples;

    std::size_t samples_per_pulse() const;
    std::size_t n_samples() const { return samples.size(); }
};

/// V(theta) = S+ sin^2 theta + S- cos^2 theta.
double quadrature_variance(double theta, double s_minus_lin, double s_plus_lin);

/// Generates trace number `trace_index` of the acquisition; its RNG seed is
/// derive_seed(cfg.seed, trace_index), so any trace can be regenerated alone.
HomodyneTrace synthesize_trace(const AcquisitionConfig &cfg, double s_minus_lin, double s_plus_lin,
                               TraceKind kind, std::uint64_t trace_index = 0);

struct ManifestEntry
{
    std::string path; // relative to the manifest's directory
    TraceKind kind = TraceKind::squeezed;
    double avg_power_w = 0.0;
};

struct SweepRequest
{
    AcquisitionConfig acquisition;
    PulseTrain pulses;          // avg_power_w is overridden per sweep point
    double alpha_per_w = 0.28;
    double eta_total = 0.22;
    std::vector<double> avg_powers_w;
};

struct SweepFile
{
    ManifestEntry entry;
    std::string sha256;
};

/// Writes one squeezed trace set per power, one shot set and one electronic set,
/// plus manifest.json, into out_dir. Trace indices run over the sets in that order.
std::vector<SweepFile> synthesize_power_sweep(const SweepRequest &req, const std::filesystem::path &out_dir,
                                              unsigned threads = 1);

} // namespace sqz

#endif // SQZ_SYNTH_HPP
