#ifndef SQZ_PHYSICS_HPP
#define SQZ_PHYSICS_HPP

// Closed-form models for a single-pass degenerate parametric amplifier:
// pump power -> parametric gain, measured squeezing, detection efficiency.
//
// Units follow the field names. dB values are power dB (10 log10).

#include <array>
#include <cmath>
#include <limits>

namespace sqz
{

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

enum class Branch
{
    minus = -1,
    plus = +1,
};

inline double sign_of(Branch b) { return b == Branch::plus ? 1.0 : -1.0; }

struct WaveguideParams
{
    double length_m = 4.7e-3;
    double norm_efficiency = 1.27;       // fraction / (W cm^2)
    double prop_loss_db_per_cm = 0.6;
    double gvm_ps_per_mm = 0.3128;
    double poling_period_um = 4.93;      // metadata
    double temperature_c = 29.0;         // metadata

    void validate() const;

    double length_cm() const { return length_m * 100.0; }

    /// Total SHG efficiency (fraction per watt) for this device length.
    double alpha_per_w() const;

    /// Propagation loss across the whole device, as a positive dB number.
    double propagation_loss_db() const { return prop_loss_db_per_cm * length_cm(); }
};

struct PulseTrain
{
    double avg_power_w = 310e-6;
    double rep_rate_hz = 100e6;
    double fwhm_s = 10e-12;
    double shape_factor = 1.0;

    void validate() const;

    double pulse_energy_j() const { return avg_power_w / rep_rate_hz; }
};

namespace shape
{
inline constexpr double flat = 1.0;
inline constexpr double sech2 = 0.8814;
inline constexpr double gaussian = 0.9394;
} // namespace shape

struct DetectionBudget
{
    double eta_waveguide = 1.0;
    double eta_optics = 1.0;
    double eta_visibility = 1.0;
    double eta_quantum = 1.0;
    double eta_electronic = 1.0;

    void validate() const;

    /// Homodyne-detector share of the chain: overlap x quantum efficiency x electronic clearance.
    double homodyne() const { return eta_visibility * eta_quantum * eta_electronic; }

    /// Everything after the waveguide output facet.
    double external() const { return eta_optics * homodyne(); }

    double total() const { return eta_waveguide * external(); }
};

struct BudgetTotal
{
    double linear = 0.0;
    double db = 0.0;
};

struct GainResult
{
    double g_plus_db = 0.0;
    double g_minus_db = 0.0;
    double g_plus_lin = 1.0;
    double g_minus_lin = 1.0;
};

struct SqueezingLevels
{
    double s_minus_lin = 1.0;
    double s_plus_lin = 1.0;
    double s_minus_db = 0.0;
    double s_plus_db = 0.0;
};

double peak_power(const PulseTrain &p);

/// eta * exp(+-2 sqrt(alpha P)) + 1 - eta. Shared by the gain and squeezing laws.
double amplifier_response(double peak_power_w, double alpha_per_w, double eta, Branch branch);

GainResult parametric_gain(double peak_power_w, double alpha_per_w, double eta_mm);

SqueezingLevels squeezing_levels(double peak_power_w, double alpha_per_w, double eta_total);

/// Effective efficiency of a detector whose shot noise sits clearance_db above its electronic noise.
/// An infinite clearance returns 1.
double electronic_efficiency(double clearance_db);

double visibility_to_efficiency(double visibility);

BudgetTotal budget_total(const DetectionBudget &b);

/// Undo a loss channel of transmission eta_external acting on a measured variance.
/// Throws UnphysicalError if the measurement lies at or below the 1 - eta floor.
double infer_onchip_squeezing(double measured_db, double eta_external);

/// Forward model of infer_onchip_squeezing.
double apply_loss_db(double onchip_db, double eta);

/// %/(W cm^2) x cm^2 -> %/W. Units pass straight through, so fractions work too.
double normalized_to_total_efficiency(double norm_eff, double length_cm);

} // namespace sqz

#endif // SQZ_PHYSICS_HPP
