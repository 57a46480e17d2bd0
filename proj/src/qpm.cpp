#include "sqz/qpm.hpp"
#include "sqz/error.hpp"
#include "sqz/rng.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace sqz
{

namespace
{

constexpr double pi = std::numbers::pi;

double sinc(double x)
{
    if (std::abs(x) < 1e-8)
        return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

/// integral of exp(i k z) over [z0, z0 + len]
std::complex<double> phase_integral(double k, double z0, double len)
{
    return std::polar(len * sinc(0.5 * k * len), k * (z0 + 0.5 * len));
}

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    const auto last = s.find_last_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    return s.substr(first, last - first + 1);
}

void validate_band(std::span<const DispersionRow> band, const char *name)
{
    for (std::size_t i = 0; i < band.size(); ++i)
    {
        const auto &r = band[i];
        if (!(r.n_eff > 1.0) || !(r.n_g > 1.0))
            fail(ErrorCode::data, std::string(name) + " band: indices must exceed 1");
        if (i > 0 && !(r.wavelength_nm > band[i - 1].wavelength_nm))
            fail(ErrorCode::data, std::string(name) + " band: wavelengths must be strictly increasing");
    }
}

} // namespace

void DispersionInput::validate() const
{
    validate_band(fund, "fund");
    validate_band(sh, "sh");
}

DispersionInput DispersionInput::from_csv(std::istream &in)
{
    DispersionInput d;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "band,wavelength_nm,n_eff,n_g")
        fail(ErrorCode::data, "dispersion CSV: expected header band,wavelength_nm,n_eff,n_g");

    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        line = trim(line);
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string band, f1, f2, f3;
        if (!std::getline(ss, band, ',') || !std::getline(ss, f1, ',') || !std::getline(ss, f2, ',') ||
            !std::getline(ss, f3))
            fail(ErrorCode::data, "dispersion CSV line " + std::to_string(line_no) + ": expected 4 fields");
        DispersionRow row;
        try
        {
            row.wavelength_nm = std::stod(f1);
            row.n_eff = std::stod(f2);
            row.n_g = std::stod(f3);
        }
        catch (const std::exception &)
        {
            fail(ErrorCode::data, "dispersion CSV line " + std::to_string(line_no) + ": bad number");
        }
        band = trim(band);
        if (band == "fund")
            d.fund.push_back(row);
        else if (band == "sh")
            d.sh.push_back(row);
        else
            fail(ErrorCode::data, "dispersion CSV line " + std::to_string(line_no) + ": unknown band '" +
                                      band + "'");
    }
    d.validate();
    return d;
}

DispersionInput DispersionInput::from_csv_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::data, "cannot open dispersion table " + path);
    return from_csv(in);
}

double interpolate_group_index(std::span<const DispersionRow> band, double wavelength_nm)
{
    if (band.empty() || wavelength_nm < band.front().wavelength_nm || wavelength_nm > band.back().wavelength_nm)
        fail(ErrorCode::invalid_argument,
             "wavelength " + std::to_string(wavelength_nm) + " nm outside the dispersion table");
    if (band.size() == 1)
        return band.front().n_g;

    auto hi = std::lower_bound(band.begin(), band.end(), wavelength_nm,
                               [](const DispersionRow &r, double w) { return r.wavelength_nm < w; });
    if (hi == band.begin())
        return hi->n_g;
    auto lo = hi - 1;
    const double t = (wavelength_nm - lo->wavelength_nm) / (hi->wavelength_nm - lo->wavelength_nm);
    return lo->n_g + t * (hi->n_g - lo->n_g);
}

double PolingMap::total_length_um() const
{
    double total = 0.0;
    for (double d : domain_um)
        total += d;
    return total;
}

void PolingMap::validate(double length_m) const
{
    if (domain_um.empty())
        fail(ErrorCode::invalid_argument, "poling map is empty");
    if (sign.size() != domain_um.size())
        fail(ErrorCode::invalid_argument, "poling map: one sign per domain required");
    require(nominal_period_um > 0.0, "poling map: nominal period must be > 0");
    double longest = 0.0;
    for (std::size_t i = 0; i < domain_um.size(); ++i)
    {
        if (!(domain_um[i] > 0.0) || !std::isfinite(domain_um[i]))
            fail(ErrorCode::invalid_argument, "poling map: domain " + std::to_string(i) + " has length <= 0");
        if (sign[i] != 1 && sign[i] != -1)
            fail(ErrorCode::invalid_argument, "poling map: signs must be +1 or -1");
        longest = std::max(longest, domain_um[i]);
    }
    if (length_m > 0.0 && std::abs(total_length_um() - length_m * 1e6) > longest)
        fail(ErrorCode::invalid_argument, "poling map length differs from the waveguide by more than one domain");
}

PolingMap PolingMap::periodic(double period_um, std::size_t n_domains)
{
    require(period_um > 0.0 && n_domains > 0, "periodic map needs a positive period and domain count");
    PolingMap m;
    m.nominal_period_um = period_um;
    m.domain_um.assign(n_domains, period_um / 2.0);
    m.sign.resize(n_domains);
    for (std::size_t i = 0; i < n_domains; ++i)
        m.sign[i] = (i % 2 == 0) ? 1 : -1;
    return m;
}

PolingMap PolingMap::defective(double period_um, double length_m, double jitter, double missing_flip_prob,
                               std::uint64_t seed)
{
    require(period_um > 0.0 && length_m > 0.0, "defective map needs a positive period and length");
    require(jitter >= 0.0, "jitter must be >= 0");
    require(missing_flip_prob >= 0.0 && missing_flip_prob <= 1.0, "missing-flip probability must lie in [0, 1]");

    const double half = period_um / 2.0;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(length_m * 1e6 / half)));
    const double total = static_cast<double>(n) * half;
    const double min_domain = 0.01 * half;

    CounterRng rng(seed);
    std::vector<double> walls(n + 1);
    walls[0] = 0.0;
    walls[n] = total;
    for (std::size_t j = 1; j < n; ++j)
        walls[j] = static_cast<double>(j) * half + jitter * period_um * rng.normal();
    // Walls may not cross; clamp forward then backward against the fixed end.
    for (std::size_t j = 1; j < n; ++j)
        walls[j] = std::max(walls[j], walls[j - 1] + min_domain);
    for (std::size_t j = n - 1; j >= 1; --j)
        walls[j] = std::min(walls[j], walls[j + 1] - min_domain);

    PolingMap m = periodic(period_um, n);
    for (std::size_t j = 0; j < n; ++j)
    {
        m.domain_um[j] = walls[j + 1] - walls[j];
        if (m.sign[j] < 0 && rng.uniform() < missing_flip_prob)
            m.sign[j] = 1;
    }
    return m;
}

std::vector<double> ideal_qpm_spectrum(std::span<const double> delta_k, double length_m)
{
    require(length_m > 0.0, "device length must be > 0");
    std::vector<double> out(delta_k.size());
    std::transform(delta_k.begin(), delta_k.end(), out.begin(), [&](double dk) {
        const double s = sinc(0.5 * dk * length_m);
        return s * s;
    });
    return out;
}

std::vector<double> defective_qpm_spectrum(const PolingMap &map, std::span<const double> delta_k,
                                           QpmEvaluation mode)
{
    map.validate();
    const double grating_k = 2.0 * pi / (map.nominal_period_um * 1e-6);
    const std::size_t n = map.size();

    std::vector<double> start(n), len(n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j)
    {
        start[j] = z;
        len[j] = map.domain_um[j] * 1e-6;
        z += len[j];
    }
    const double total = z;
    const double reference = 2.0 / pi * total;

    // Per-domain grating weight: the domain's mean of sign * exp(i K z).
    std::vector<std::complex<double>> weight(n);
    for (std::size_t j = 0; j < n; ++j)
        weight[j] = static_cast<double>(map.sign[j]) * phase_integral(grating_k, start[j], len[j]) / len[j];

    std::vector<double> out(delta_k.size());
    for (std::size_t i = 0; i < delta_k.size(); ++i)
    {
        std::complex<double> amp{0.0, 0.0};
        if (mode == QpmEvaluation::envelope)
        {
            for (std::size_t j = 0; j < n; ++j)
                amp += weight[j] * phase_integral(delta_k[i], start[j], len[j]);
        }
        else
        {
            const double k = grating_k + delta_k[i];
            for (std::size_t j = 0; j < n; ++j)
                amp += static_cast<double>(map.sign[j]) * phase_integral(k, start[j], len[j]);
        }
        out[i] = std::norm(amp) / (reference * reference);
    }
    return out;
}

double spectrum_asymmetry(std::span<const double> delta_k, std::span<const double> eta)
{
    require(delta_k.size() == eta.size() && !eta.empty(), "asymmetry: grid and spectrum sizes differ");
    const std::size_t n = delta_k.size();
    const double scale = std::max(std::abs(delta_k.front()), std::abs(delta_k.back()));
    double diff = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const std::size_t m = n - 1 - i;
        if (std::abs(delta_k[i] + delta_k[m]) > 1e-9 * scale)
            fail(ErrorCode::invalid_argument, "asymmetry needs a grid symmetric about zero");
        diff += std::abs(eta[i] - eta[m]);
        total += eta[i];
    }
    return total > 0.0 ? 0.5 * diff / total : 0.0;
}

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    require(n >= 2, "linspace needs at least two points");
    std::vector<double> v(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + step * static_cast<double>(i);
    // Force exact mirror symmetry for grids centred on zero.
    if (lo == -hi)
        for (std::size_t i = 0; i < n / 2; ++i)
            v[n - 1 - i] = -v[i];
    if (n % 2 == 1 && lo == -hi)
        v[n / 2] = 0.0;
    return v;
}

double temporal_walkoff_ps(double gvm_ps_per_mm, double length_m)
{
    require(length_m >= 0.0, "length must be >= 0");
    return gvm_ps_per_mm * length_m * 1e3;
}

double gvm_from_dispersion(const DispersionInput &d, double lambda_fund_nm)
{
    if (d.fund.empty() || d.sh.empty())
        fail(ErrorCode::invalid_argument, "dispersion table must cover both fund and sh bands");
    const double ng_fund = interpolate_group_index(d.fund, lambda_fund_nm);
    const double ng_sh = interpolate_group_index(d.sh, lambda_fund_nm / 2.0);
    return (ng_sh - ng_fund) / c_mm_per_ps;
}

FilterShape parse_filter_shape(std::string_view name)
{
    if (name == "gaussian")
        return FilterShape::gaussian;
    if (name == "rectangular")
        return FilterShape::rectangular;
    fail(ErrorCode::invalid_argument, "unknown filter shape '" + std::string(name) + "'");
}

double time_bandwidth_product(FilterShape shape)
{
    return shape == FilterShape::gaussian ? 0.441 : 0.886;
}

double filtered_pulse_duration(double filter_fwhm_hz, FilterShape shape)
{
    require(std::isfinite(filter_fwhm_hz) && filter_fwhm_hz > 0.0, "filter bandwidth must be > 0");
    return time_bandwidth_product(shape) / filter_fwhm_hz;
}

} // namespace sqz
