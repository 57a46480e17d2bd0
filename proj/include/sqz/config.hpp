#ifndef SQZ_CONFIG_HPP
#define SQZ_CONFIG_HPP

// Run configuration: one JSON document, strict schema (unknown keys are errors).
// Comments are accepted in config files.

#include "sqz/physics.hpp"
#include "sqz/synth.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sqz
{

/// Either an efficiency or the raw measurement it derives from. Direct eta_* values win.
struct BudgetConfig
{
    std::optional<double> eta_waveguide;
    std::optional<double> eta_optics;
    std::optional<double> eta_visibility = 0.85;
    std::optional<double> eta_quantum = 0.98;
    std::optional<double> eta_electronic = 0.84;
    std::optional<double> waveguide_loss_db = 0.29; // positive dB
    std::optional<double> optics_loss_db = 4.57;    // positive dB
    std::optional<double> visibility;
    std::optional<double> clearance_db;      // falls back to acquisition.lo_clearance_db
    std::optional<double> eta_external;      // for on-chip inference; default optics x homodyne
    std::optional<double> measured_squeezing_db = -0.33;

    static BudgetConfig none()
    {
        BudgetConfig b;
        b.eta_visibility = b.eta_quantum = b.eta_electronic = std::nullopt;
        b.waveguide_loss_db = b.optics_loss_db = b.measured_squeezing_db = std::nullopt;
        return b;
    }
};

struct FitConfig
{
    double tol = 1e-10;
    int max_iter = 200;
    bool fix_alpha = true;
    std::optional<double> alpha_per_w; // default: waveguide.alpha_per_w()
};

struct SweepConfig
{
    std::vector<double> avg_powers_w{310e-6};
    std::optional<double> alpha_per_w; // default: waveguide.alpha_per_w()
    double eta_total = 0.22;
};

struct ProcessingConfig
{
    std::size_t pulses_per_bin = 5000;
    std::size_t trigger_offset = 0;
    bool subtract_electronic = false;
};

struct QpmConfig
{
    std::optional<std::string> dispersion_csv;
    double lambda_fund_nm = 1556.6;
    double jitter = 0.05;
    double missing_flip_prob = 0.0;
    std::uint64_t seed = 1;
    double filter_fwhm_hz = 100e9;
    std::string filter_shape = "gaussian";
    double observed_pulse_fwhm_s = 12e-12;
};

struct RunConfig
{
    WaveguideParams waveguide;
    PulseTrain pulses;
    AcquisitionConfig acquisition;
    BudgetConfig budget;
    FitConfig fit;
    SweepConfig sweep;
    ProcessingConfig processing;
    QpmConfig qpm;

    void validate() const;

    DetectionBudget detection_budget() const;
    double eta_external() const;
    double sweep_alpha() const { return sweep.alpha_per_w.value_or(waveguide.alpha_per_w()); }
    double fit_alpha() const { return fit.alpha_per_w.value_or(waveguide.alpha_per_w()); }
};

/// Relative paths inside the document resolve against base_dir.
RunConfig parse_config(const nlohmann::json &doc, const std::filesystem::path &base_dir = {});
RunConfig load_config(const std::filesystem::path &path);
nlohmann::json to_json(const RunConfig &cfg);

} // namespace sqz

#endif // SQZ_CONFIG_HPP
