#include "sqz/config.hpp"
#include "sqz/error.hpp"
#include "sqz/qpm.hpp"

#include <fstream>
#include <set>

namespace sqz
{

using nlohmann::json;

namespace
{

[[noreturn]] void config_error(const std::string &what) { throw Error(ErrorCode::config, what); }

/// Reads keys from one JSON object and rejects any it was never asked about.
class Section
{
public:
    Section(const json &doc, std::string name) : name_(std::move(name))
    {
        if (!doc.is_object())
            config_error("section '" + name_ + "' must be an object");
        doc_ = &doc;
    }

    ~Section() noexcept(false)
    {
        if (std::uncaught_exceptions() > 0)
            return;
        for (const auto &[key, _] : doc_->items())
            if (!seen_.contains(key))
                config_error("unknown key '" + name_ + "." + key + "'");
    }

    template <typename T>
    void read(const char *key, T &out)
    {
        seen_.insert(key);
        if (!doc_->contains(key))
            return;
        try
        {
            out = (*doc_)[key].get<T>();
        }
        catch (const json::exception &)
        {
            config_error("'" + name_ + "." + key + "' has the wrong type");
        }
    }

    template <typename T>
    void read(const char *key, std::optional<T> &out)
    {
        seen_.insert(key);
        if (!doc_->contains(key))
            return;
        if ((*doc_)[key].is_null())
        {
            out.reset();
            return;
        }
        T value{};
        read(key, value);
        out = value;
    }

    /// Like read(), but also accepts the string "inf".
    void read_extended(const char *key, double &out)
    {
        if (doc_->contains(key) && (*doc_)[key] == "inf")
        {
            seen_.insert(key);
            out = INFINITY;
            return;
        }
        read(key, out);
    }

    /// Returns the named sub-object (or an empty one) and marks the key as known.
    const json &child(const char *key)
    {
        static const json empty = json::object();
        seen_.insert(key);
        return doc_->contains(key) ? (*doc_)[key] : empty;
    }

private:
    const json *doc_ = nullptr;
    std::string name_;
    std::set<std::string> seen_;
};

template <typename T>
void put(json &j, const char *key, const std::optional<T> &v)
{
    if (v)
        j[key] = *v;
}

json number_or_inf(double v) { return std::isinf(v) ? json("inf") : json(v); }

void check(bool ok, const std::string &what)
{
    if (!ok)
        config_error(what);
}

} // namespace

void RunConfig::validate() const
{
    try
    {
        waveguide.validate();
        pulses.validate();
        acquisition.validate();
        detection_budget().validate();
    }
    catch (const Error &e)
    {
        config_error(e.what());
    }
    const double ext = eta_external();
    check(ext > 0.0 && ext <= 1.0, "budget.eta_external must lie in (0, 1]");
    check(fit.tol > 0.0 && fit.max_iter > 0, "fit.tol and fit.max_iter must be positive");
    check(!sweep.avg_powers_w.empty(), "sweep.avg_powers_w must not be empty");
    for (double p : sweep.avg_powers_w)
        check(p >= 0.0 && std::isfinite(p), "sweep powers must be >= 0");
    check(sweep.eta_total >= 0.0 && sweep.eta_total <= 1.0, "sweep.eta_total must lie in [0, 1]");
    check(processing.pulses_per_bin >= 2, "processing.pulses_per_bin must be >= 2");
    check(qpm.jitter >= 0.0 && qpm.missing_flip_prob >= 0.0 && qpm.missing_flip_prob <= 1.0,
          "qpm defect parameters out of range");
    check(qpm.filter_fwhm_hz > 0.0, "qpm.filter_fwhm_hz must be > 0");
    check(qpm.filter_shape == "gaussian" || qpm.filter_shape == "rectangular",
          "qpm.filter_shape must be gaussian or rectangular");
    if (qpm.dispersion_csv)
        check(std::filesystem::exists(*qpm.dispersion_csv),
              "qpm.dispersion_csv does not exist: " + *qpm.dispersion_csv);
}

DetectionBudget RunConfig::detection_budget() const
{
    const auto &b = budget;
    DetectionBudget d;
    d.eta_waveguide = b.eta_waveguide ? *b.eta_waveguide
                      : b.waveguide_loss_db ? db_to_linear(-*b.waveguide_loss_db)
                                            : db_to_linear(-waveguide.propagation_loss_db());
    d.eta_optics = b.eta_optics ? *b.eta_optics : b.optics_loss_db ? db_to_linear(-*b.optics_loss_db) : 1.0;
    d.eta_visibility = b.eta_visibility ? *b.eta_visibility
                       : b.visibility   ? visibility_to_efficiency(*b.visibility)
                                        : 1.0;
    d.eta_quantum = b.eta_quantum.value_or(1.0);
    d.eta_electronic = b.eta_electronic ? *b.eta_electronic
                                        : electronic_efficiency(b.clearance_db.value_or(acquisition.lo_clearance_db));
    return d;
}

double RunConfig::eta_external() const { return budget.eta_external.value_or(detection_budget().external()); }

RunConfig parse_config(const json &doc, const std::filesystem::path &base_dir)
{
    RunConfig c;
    {
        Section root(doc, "config");
        auto sub = [&](const char *key) -> const json & { return root.child(key); };
        // An explicit budget section replaces the built-in one wholesale.
        if (doc.is_object() && doc.contains("budget"))
            c.budget = BudgetConfig::none();

        {
            Section s(sub("waveguide"), "waveguide");
            s.read("length_m", c.waveguide.length_m);
            s.read("norm_eff", c.waveguide.norm_efficiency);
            s.read("loss_db_per_cm", c.waveguide.prop_loss_db_per_cm);
            s.read("gvm_ps_per_mm", c.waveguide.gvm_ps_per_mm);
            s.read("poling_period_um", c.waveguide.poling_period_um);
            s.read("temperature_c", c.waveguide.temperature_c);
        }
        {
            Section s(sub("pulses"), "pulses");
            s.read("avg_power_w", c.pulses.avg_power_w);
            s.read("rep_rate_hz", c.pulses.rep_rate_hz);
            s.read("fwhm_s", c.pulses.fwhm_s);
            s.read("shape_factor", c.pulses.shape_factor);
        }
        {
            auto &a = c.acquisition;
            Section s(sub("acquisition"), "acquisition");
            s.read("sample_rate_hz", a.sample_rate_hz);
            s.read("rep_rate_hz", a.rep_rate_hz);
            s.read("n_samples", a.n_samples);
            s.read("n_traces", a.n_traces);
            s.read_extended("lo_clearance_db", a.lo_clearance_db);
            s.read("ramp_start_rad", a.ramp_start_rad);
            s.read("ramp_end_rad", a.ramp_end_rad);
            s.read("pulse_kernel", a.pulse_kernel);
            s.read("seed", a.seed);
        }
        {
            auto &b = c.budget;
            Section s(sub("budget"), "budget");
            s.read("eta_waveguide", b.eta_waveguide);
            s.read("eta_optics", b.eta_optics);
            s.read("eta_visibility", b.eta_visibility);
            s.read("eta_quantum", b.eta_quantum);
            s.read("eta_electronic", b.eta_electronic);
            s.read("waveguide_loss_db", b.waveguide_loss_db);
            s.read("optics_loss_db", b.optics_loss_db);
            s.read("visibility", b.visibility);
            s.read("clearance_db", b.clearance_db);
            s.read("eta_external", b.eta_external);
            s.read("measured_squeezing_db", b.measured_squeezing_db);
        }
        {
            Section s(sub("fit"), "fit");
            s.read("tol", c.fit.tol);
            s.read("max_iter", c.fit.max_iter);
            s.read("fix_alpha", c.fit.fix_alpha);
            s.read("alpha_per_w", c.fit.alpha_per_w);
        }
        {
            Section s(sub("sweep"), "sweep");
            s.read("avg_powers_w", c.sweep.avg_powers_w);
            s.read("alpha_per_w", c.sweep.alpha_per_w);
            s.read("eta_total", c.sweep.eta_total);
        }
        {
            Section s(sub("processing"), "processing");
            s.read("pulses_per_bin", c.processing.pulses_per_bin);
            s.read("trigger_offset", c.processing.trigger_offset);
            s.read("subtract_electronic", c.processing.subtract_electronic);
        }
        {
            auto &q = c.qpm;
            Section s(sub("qpm"), "qpm");
            s.read("dispersion_csv", q.dispersion_csv);
            s.read("lambda_fund_nm", q.lambda_fund_nm);
            s.read("jitter", q.jitter);
            s.read("missing_flip_prob", q.missing_flip_prob);
            s.read("seed", q.seed);
            s.read("filter_fwhm_hz", q.filter_fwhm_hz);
            s.read("filter_shape", q.filter_shape);
            s.read("observed_pulse_fwhm_s", q.observed_pulse_fwhm_s);
        }
    }
    if (c.qpm.dispersion_csv && !base_dir.empty() && std::filesystem::path(*c.qpm.dispersion_csv).is_relative())
        c.qpm.dispersion_csv = (base_dir / *c.qpm.dispersion_csv).string();
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        config_error("cannot open config " + path.string());
    json doc;
    try
    {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    }
    catch (const json::parse_error &e)
    {
        config_error("config " + path.string() + ": " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

json to_json(const RunConfig &c)
{
    json j;
    j["waveguide"] = {{"length_m", c.waveguide.length_m},
                      {"norm_eff", c.waveguide.norm_efficiency},
                      {"loss_db_per_cm", c.waveguide.prop_loss_db_per_cm},
                      {"gvm_ps_per_mm", c.waveguide.gvm_ps_per_mm},
                      {"poling_period_um", c.waveguide.poling_period_um},
                      {"temperature_c", c.waveguide.temperature_c}};
    j["pulses"] = {{"avg_power_w", c.pulses.avg_power_w},
                   {"rep_rate_hz", c.pulses.rep_rate_hz},
                   {"fwhm_s", c.pulses.fwhm_s},
                   {"shape_factor", c.pulses.shape_factor}};
    const auto &a = c.acquisition;
    j["acquisition"] = {{"sample_rate_hz", a.sample_rate_hz},
                        {"rep_rate_hz", a.rep_rate_hz},
                        {"n_samples", a.n_samples},
                        {"n_traces", a.n_traces},
                        {"lo_clearance_db", number_or_inf(a.lo_clearance_db)},
                        {"ramp_start_rad", a.ramp_start_rad},
                        {"ramp_end_rad", a.ramp_end_rad},
                        {"seed", a.seed}};
    if (!a.pulse_kernel.empty())
        j["acquisition"]["pulse_kernel"] = a.pulse_kernel;

    json b = json::object();
    put(b, "eta_waveguide", c.budget.eta_waveguide);
    put(b, "eta_optics", c.budget.eta_optics);
    put(b, "eta_visibility", c.budget.eta_visibility);
    put(b, "eta_quantum", c.budget.eta_quantum);
    put(b, "eta_electronic", c.budget.eta_electronic);
    put(b, "waveguide_loss_db", c.budget.waveguide_loss_db);
    put(b, "optics_loss_db", c.budget.optics_loss_db);
    put(b, "visibility", c.budget.visibility);
    put(b, "clearance_db", c.budget.clearance_db);
    put(b, "eta_external", c.budget.eta_external);
    put(b, "measured_squeezing_db", c.budget.measured_squeezing_db);
    j["budget"] = b;

    j["fit"] = {{"tol", c.fit.tol}, {"max_iter", c.fit.max_iter}, {"fix_alpha", c.fit.fix_alpha}};
    put(j["fit"], "alpha_per_w", c.fit.alpha_per_w);
    j["sweep"] = {{"avg_powers_w", c.sweep.avg_powers_w}, {"eta_total", c.sweep.eta_total}};
    put(j["sweep"], "alpha_per_w", c.sweep.alpha_per_w);
    j["processing"] = {{"pulses_per_bin", c.processing.pulses_per_bin},
                       {"trigger_offset", c.processing.trigger_offset},
                       {"subtract_electronic", c.processing.subtract_electronic}};
    j["qpm"] = {{"lambda_fund_nm", c.qpm.lambda_fund_nm},
                {"jitter", c.qpm.jitter},
                {"missing_flip_prob", c.qpm.missing_flip_prob},
                {"seed", c.qpm.seed},
                {"filter_fwhm_hz", c.qpm.filter_fwhm_hz},
                {"filter_shape", c.qpm.filter_shape},
                {"observed_pulse_fwhm_s", c.qpm.observed_pulse_fwhm_s}};
    put(j["qpm"], "dispersion_csv", c.qpm.dispersion_csv);
    return j;
}

} // namespace sqz
