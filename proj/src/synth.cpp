#include "sqz/synth.hpp"
#include "sqz/error.hpp"
#include "sqz/parallel.hpp"
#include "sqz/rng.hpp"
#include "sqz/trace_io.hpp"

#include <cmath>
#include <numbers>

namespace sqz
{

const char *to_string(TraceKind kind)
{
    switch (kind)
    {
    case TraceKind::squeezed:
        return "squeezed";
    case TraceKind::shot:
        return "shot";
    case TraceKind::electronic:
        return "electronic";
    }
    return "unknown";
}

TraceKind parse_trace_kind(std::string_view name)
{
    if (name == "squeezed")
        return TraceKind::squeezed;
    if (name == "shot")
        return TraceKind::shot;
    if (name == "electronic")
        return TraceKind::electronic;
    fail(ErrorCode::data, "unknown trace kind '" + std::string(name) + "'");
}

std::vector<double> raised_cosine_kernel(std::size_t width)
{
    require(width > 0, "kernel width must be > 0");
    std::vector<double> k(width);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < width; ++i)
    {
        const double s = std::sin(std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(width));
        k[i] = s * s;
        norm2 += k[i] * k[i];
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (double &v : k)
        v *= scale;
    return k;
}

void AcquisitionConfig::validate() const
{
    require(sample_rate_hz > 0 && rep_rate_hz > 0, "sample and repetition rates must be > 0");
    require(sample_rate_hz % rep_rate_hz == 0, "sample rate must be an integer multiple of the repetition rate");
    const auto w = samples_per_pulse();
    require(n_samples > 0 && n_samples % w == 0, "n_samples must be a positive multiple of samples per pulse");
    require(n_traces > 0, "n_traces must be > 0");
    require(!std::isnan(lo_clearance_db) && lo_clearance_db >= 0.0, "clearance must be >= 0 dB");
    require(std::isfinite(ramp_start_rad) && std::isfinite(ramp_end_rad), "ramp endpoints must be finite");
    require(w <= 65535, "pulse window too long for the trace format");
    if (!pulse_kernel.empty())
    {
        require(pulse_kernel.size() == w, "pulse kernel length must equal samples per pulse");
        double norm2 = 0.0;
        for (double v : pulse_kernel)
            norm2 += v * v;
        require(std::abs(norm2 - 1.0) <= 1e-9, "pulse kernel must have unit L2 norm");
    }
}

std::vector<double> AcquisitionConfig::kernel() const
{
    return pulse_kernel.empty() ? raised_cosine_kernel(samples_per_pulse()) : pulse_kernel;
}

double AcquisitionConfig::electronic_variance() const
{
    return 1.0 - electronic_efficiency(lo_clearance_db);
}

std::size_t HomodyneTrace::samples_per_pulse() const
{
    return rep_rate_hz == 0 ? 0 : static_cast<std::size_t>(sample_rate_hz / rep_rate_hz);
}

double quadrature_variance(double theta, double s_minus_lin, double s_plus_lin)
{
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return s_plus_lin * s * s + s_minus_lin * c * c;
}

HomodyneTrace synthesize_trace(const AcquisitionConfig &cfg, double s_minus_lin, double s_plus_lin,
                               TraceKind kind, std::uint64_t trace_index)
{
    cfg.validate();
    const double elec_var = cfg.electronic_variance();

    if (kind == TraceKind::shot)
        s_minus_lin = s_plus_lin = 1.0;
    if (kind == TraceKind::squeezed)
    {
        require(std::isfinite(s_minus_lin) && std::isfinite(s_plus_lin), "squeezing levels must be finite");
        require(std::min(s_minus_lin, s_plus_lin) >= elec_var,
                "squeezed variance below the electronic-noise floor of the detector");
    }

    HomodyneTrace t;
    t.kind = kind;
    t.sample_rate_hz = cfg.sample_rate_hz;
    t.rep_rate_hz = cfg.rep_rate_hz;
    t.ramp_start_rad = cfg.ramp_start_rad;
    t.ramp_end_rad = cfg.ramp_end_rad;
    t.clearance_db = cfg.lo_clearance_db;
    t.seed = derive_seed(cfg.seed, trace_index);
    t.kernel = cfg.kernel();
    t.samples.resize(cfg.n_samples);

    const std::size_t w = cfg.samples_per_pulse();
    const std::size_t n_pulses = cfg.n_pulses();
    const double elec_sigma = std::sqrt(elec_var);
    const double span = cfg.ramp_end_rad - cfg.ramp_start_rad;

    CounterRng rng(t.seed);
    for (std::size_t k = 0; k < n_pulses; ++k)
    {
        double x = 0.0;
        if (kind != TraceKind::electronic)
        {
            const double theta =
                cfg.ramp_start_rad + span * static_cast<double>(k) / static_cast<double>(n_pulses);
            const double quantum_var = quadrature_variance(theta, s_minus_lin, s_plus_lin) - elec_var;
            x = std::sqrt(std::max(quantum_var, 0.0)) * rng.normal();
        }
        float *window = t.samples.data() + k * w;
        for (std::size_t i = 0; i < w; ++i)
            window[i] = static_cast<float>(x * t.kernel[i] + elec_sigma * rng.normal());
    }
    return t;
}

std::vector<SweepFile> synthesize_power_sweep(const SweepRequest &req, const std::filesystem::path &out_dir,
                                              unsigned threads)
{
    req.acquisition.validate();
    require(!req.avg_powers_w.empty(), "power sweep needs at least one power");
    for (double p : req.avg_powers_w)
        require(std::isfinite(p) && p >= 0.0, "sweep powers must be >= 0");

    struct Job
    {
        TraceKind kind;
        double avg_power_w;
        SqueezingLevels levels;
        std::uint64_t index;
        std::string name;
    };

    std::vector<Job> jobs;
    const std::uint32_t n = req.acquisition.n_traces;
    auto add_set = [&](TraceKind kind, double avg_power, const SqueezingLevels &levels, const std::string &stem) {
        const std::uint64_t base = jobs.size();
        for (std::uint32_t i = 0; i < n; ++i)
            jobs.push_back({kind, avg_power, levels, base + i, stem + "_t" + std::to_string(i) + ".sqzt"});
    };

    for (std::size_t p = 0; p < req.avg_powers_w.size(); ++p)
    {
        PulseTrain pulses = req.pulses;
        pulses.avg_power_w = req.avg_powers_w[p];
        const auto levels = squeezing_levels(peak_power(pulses), req.alpha_per_w, req.eta_total);
        add_set(TraceKind::squeezed, pulses.avg_power_w, levels, "squeezed_p" + std::to_string(p));
    }
    add_set(TraceKind::shot, 0.0, {}, "shot");
    add_set(TraceKind::electronic, 0.0, {}, "electronic");

    std::filesystem::create_directories(out_dir);
    std::vector<SweepFile> files(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        const Job &job = jobs[j];
        const auto trace =
            synthesize_trace(req.acquisition, job.levels.s_minus_lin, job.levels.s_plus_lin, job.kind, job.index);
        const auto path = out_dir / job.name;
        write_trace(path, trace);
        files[j] = {{job.name, job.kind, job.avg_power_w}, sha256_file(path)};
    });

    std::vector<ManifestEntry> manifest;
    manifest.reserve(files.size());
    for (const auto &f : files)
        manifest.push_back(f.entry);
    write_manifest(out_dir / "manifest.json", manifest);
    return files;
}

} // namespace sqz
