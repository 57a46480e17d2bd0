#ifndef SQZ_QPM_HPP
#define SQZ_QPM_HPP

// Quasi-phase-matching response, poling-defect Monte Carlo, temporal walk-off
// and transform-limited pulse duration behind a spectral filter.
//
// Phase mismatch is in rad/m throughout; domain lengths are in micrometres.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace sqz
{

inline constexpr double c_mm_per_ps = 0.299792458;

struct DispersionRow
{
    double wavelength_nm = 0.0;
    double n_eff = 0.0;
    double n_g = 0.0;
};

/// Modal indices for the fundamental and second-harmonic bands (one table per band).
struct DispersionInput
{
    std::vector<DispersionRow> fund;
    std::vector<DispersionRow> sh;

    void validate() const;

    /// CSV with header `band,wavelength_nm,n_eff,n_g`; bands are `fund` or `sh`.
    static DispersionInput from_csv(std::istream &in);
    static DispersionInput from_csv_file(const std::string &path);
};

/// Linear interpolation of the group index inside one band.
double interpolate_group_index(std::span<const DispersionRow> band, double wavelength_nm);

struct PolingMap
{
    double nominal_period_um = 4.93;
    std::vector<double> domain_um;
    std::vector<std::int8_t> sign;

    std::size_t size() const { return domain_um.size(); }
    double total_length_um() const;
    double coherence_length_um() const { return nominal_period_um / 2.0; }

    /// Throws on empty maps, non-positive domains, bad signs, or (when
    /// length_m > 0) a total length more than one domain away from length_m.
    void validate(double length_m = 0.0) const;

    static PolingMap periodic(double period_um, std::size_t n_domains);

    /// Nominal grid for a device of length_m with every interior domain wall displaced
    /// by Normal(0, jitter * period) and each inverted domain left un-inverted with
    /// probability missing_flip_prob. End walls stay fixed.
    static PolingMap defective(double period_um, double length_m, double jitter,
                               double missing_flip_prob, std::uint64_t seed);
};

enum class QpmEvaluation
{
    envelope,   // per-domain grating weight x envelope integral at the detuning
    exact,      // raw domain sum at the full mismatch K + detuning
};

/// sinc^2(dk L / 2).
std::vector<double> ideal_qpm_spectrum(std::span<const double> delta_k, double length_m);

/// Coherent domain sum normalised by a perfectly poled device of the same length.
/// delta_k is the detuning from the nominal grating vector 2 pi / period.
std::vector<double> defective_qpm_spectrum(const PolingMap &map, std::span<const double> delta_k,
                                           QpmEvaluation mode = QpmEvaluation::envelope);

/// sum |eta(dk) - eta(-dk)| / sum eta(dk) over a grid symmetric about zero.
double spectrum_asymmetry(std::span<const double> delta_k, std::span<const double> eta);

std::vector<double> linspace(double lo, double hi, std::size_t n);

double temporal_walkoff_ps(double gvm_ps_per_mm, double length_m);

/// (n_g(lambda/2) - n_g(lambda)) / c, in ps/mm.
double gvm_from_dispersion(const DispersionInput &d, double lambda_fund_nm);

enum class FilterShape
{
    gaussian,
    rectangular,
};

FilterShape parse_filter_shape(std::string_view name);

double time_bandwidth_product(FilterShape shape);

/// Transform-limited FWHM behind a filter of the given FWHM bandwidth.
double filtered_pulse_duration(double filter_fwhm_hz, FilterShape shape);

} // namespace sqz

#endif // SQZ_QPM_HPP
