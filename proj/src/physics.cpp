#include "sqz/physics.hpp"
#include "sqz/error.hpp"

#include <string>

namespace sqz
{

namespace
{

void require_fraction(double v, const char *name)
{
    require(std::isfinite(v) && v >= 0.0 && v <= 1.0, std::string(name) + " must lie in [0, 1]");
}

void require_nonnegative(double v, const char *name)
{
    require(!std::isnan(v) && v >= 0.0, std::string(name) + " must be >= 0");
}

} // namespace

const char *to_string(ErrorCode code)
{
    switch (code)
    {
    case ErrorCode::invalid_argument:
        return "invalid_argument";
    case ErrorCode::unphysical:
        return "unphysical";
    case ErrorCode::config:
        return "config";
    case ErrorCode::data:
        return "data";
    case ErrorCode::singular:
        return "singular";
    case ErrorCode::not_converged:
        return "not_converged";
    }
    return "unknown";
}

void WaveguideParams::validate() const
{
    require(std::isfinite(length_m) && length_m > 0.0, "waveguide length must be > 0");
    require_nonnegative(norm_efficiency, "normalized efficiency");
    require_nonnegative(prop_loss_db_per_cm, "propagation loss");
}

double WaveguideParams::alpha_per_w() const
{
    return normalized_to_total_efficiency(norm_efficiency, length_cm());
}

void PulseTrain::validate() const
{
    require(std::isfinite(rep_rate_hz) && rep_rate_hz > 0.0, "repetition rate must be > 0");
    require(std::isfinite(fwhm_s) && fwhm_s > 0.0, "pulse duration must be > 0");
    require(shape_factor > 0.0 && shape_factor <= 1.2, "shape factor must lie in (0, 1.2]");
    require_nonnegative(avg_power_w, "average power");
}

void DetectionBudget::validate() const
{
    require_fraction(eta_waveguide, "eta_waveguide");
    require_fraction(eta_optics, "eta_optics");
    require_fraction(eta_visibility, "eta_visibility");
    require_fraction(eta_quantum, "eta_quantum");
    require_fraction(eta_electronic, "eta_electronic");
}

double peak_power(const PulseTrain &p)
{
    p.validate();
    return p.shape_factor * p.pulse_energy_j() / p.fwhm_s;
}

double amplifier_response(double peak_power_w, double alpha_per_w, double eta, Branch branch)
{
    const double x = 2.0 * std::sqrt(alpha_per_w * peak_power_w);
    return eta * std::exp(sign_of(branch) * x) + 1.0 - eta;
}

GainResult parametric_gain(double peak_power_w, double alpha_per_w, double eta_mm)
{
    require_nonnegative(peak_power_w, "peak power");
    require_nonnegative(alpha_per_w, "alpha");
    require_fraction(eta_mm, "mode-matching");

    GainResult g;
    g.g_plus_lin = amplifier_response(peak_power_w, alpha_per_w, eta_mm, Branch::plus);
    g.g_minus_lin = amplifier_response(peak_power_w, alpha_per_w, eta_mm, Branch::minus);
    g.g_plus_db = linear_to_db(g.g_plus_lin);
    g.g_minus_db = linear_to_db(g.g_minus_lin);
    return g;
}

SqueezingLevels squeezing_levels(double peak_power_w, double alpha_per_w, double eta_total)
{
    require_nonnegative(peak_power_w, "peak power");
    require_nonnegative(alpha_per_w, "alpha");
    require_fraction(eta_total, "detection efficiency");

    SqueezingLevels s;
    s.s_minus_lin = amplifier_response(peak_power_w, alpha_per_w, eta_total, Branch::minus);
    s.s_plus_lin = amplifier_response(peak_power_w, alpha_per_w, eta_total, Branch::plus);
    s.s_minus_db = linear_to_db(s.s_minus_lin);
    s.s_plus_db = linear_to_db(s.s_plus_lin);
    return s;
}

double electronic_efficiency(double clearance_db)
{
    require(!std::isnan(clearance_db) && clearance_db >= 0.0, "clearance must be >= 0 dB");
    if (std::isinf(clearance_db))
        return 1.0;
    return 1.0 - std::pow(10.0, -clearance_db / 10.0);
}

double visibility_to_efficiency(double visibility)
{
    require_fraction(visibility, "visibility");
    return visibility * visibility;
}

BudgetTotal budget_total(const DetectionBudget &b)
{
    b.validate();
    const double t = b.total();
    return {t, linear_to_db(t)};
}

double infer_onchip_squeezing(double measured_db, double eta_external)
{
    require(std::isfinite(eta_external) && eta_external > 0.0 && eta_external <= 1.0,
            "external efficiency must lie in (0, 1]");
    require(std::isfinite(measured_db), "measured squeezing must be finite");

    const double floor = 1.0 - eta_external;
    const double excess = db_to_linear(measured_db) - floor;
    if (!(excess > 0.0))
        throw UnphysicalError("measured variance " + std::to_string(measured_db) +
                              " dB is at or below the loss floor of " +
                              std::to_string(linear_to_db(floor)) + " dB");
    return linear_to_db(excess / eta_external);
}

double apply_loss_db(double onchip_db, double eta)
{
    require_fraction(eta, "efficiency");
    return linear_to_db(eta * db_to_linear(onchip_db) + 1.0 - eta);
}

double normalized_to_total_efficiency(double norm_eff, double length_cm)
{
    require_nonnegative(norm_eff, "normalized efficiency");
    require_nonnegative(length_cm, "length");
    return norm_eff * length_cm * length_cm;
}

} // namespace sqz
