#include "sqz/commands.hpp"
#include "sqz/dsp.hpp"
#include "sqz/error.hpp"
#include "sqz/fit.hpp"
#include "sqz/parallel.hpp"
#include "sqz/qpm.hpp"
#include "sqz/rng.hpp"
#include "sqz/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

namespace sqz
{

using nlohmann::json;
namespace fs = std::filesystem;

double round_db(double db) { return std::round(db * 1e4) / 1e4; }

namespace
{

std::string full(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out || !(out << text))
        fail(ErrorCode::data, "cannot write " + path.string());
}

void write_series_csv(const fs::path &path, const VariancePhaseSeries &s)
{
    std::ostringstream out;
    out << "bin,phase_rad,variance,stderr\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << s.bins[i].index << ',' << full(s.phase_rad(i)) << ',' << full(s.bins[i].variance) << ','
            << full(s.bins[i].std_error) << '\n';
    write_text(path, out.str());
}

PulseTrain pulses_at(const RunConfig &cfg, double avg_power_w)
{
    PulseTrain p = cfg.pulses;
    p.avg_power_w = avg_power_w;
    return p;
}

} // namespace

json cmd_simulate(const RunConfig &cfg, const SimulateOptions &opt)
{
    cfg.validate();
    SweepRequest req;
    req.acquisition = cfg.acquisition;
    req.pulses = cfg.pulses;
    req.alpha_per_w = cfg.sweep_alpha();
    req.eta_total = cfg.sweep.eta_total;
    req.avg_powers_w = cfg.sweep.avg_powers_w;

    const auto files = synthesize_power_sweep(req, opt.out_dir, opt.threads);

    json out;
    out["seed"] = cfg.acquisition.seed;
    out["generator"] = CounterRng::identity;
    out["out_dir"] = opt.out_dir.string();
    out["manifest"] = (opt.out_dir / "manifest.json").string();
    json list = json::array();
    for (const auto &f : files)
        list.push_back({{"path", f.entry.path},
                        {"kind", to_string(f.entry.kind)},
                        {"avg_power_w", f.entry.avg_power_w},
                        {"sha256", f.sha256}});
    out["files"] = list;
    json levels = json::array();
    for (double p : cfg.sweep.avg_powers_w)
    {
        const double peak = peak_power(pulses_at(cfg, p));
        const auto s = squeezing_levels(peak, req.alpha_per_w, req.eta_total);
        levels.push_back({{"avg_power_w", p},
                          {"peak_power_w", peak},
                          {"s_minus_lin", s.s_minus_lin},
                          {"s_plus_lin", s.s_plus_lin},
                          {"s_minus_db", round_db(s.s_minus_db)},
                          {"s_plus_db", round_db(s.s_plus_db)}});
    }
    out["injected"] = levels;
    return out;
}

json cmd_process(const RunConfig &cfg, const ProcessOptions &opt)
{
    cfg.validate();
    if (opt.inputs.empty())
        fail(ErrorCode::invalid_argument, "process needs a manifest or trace files");

    std::vector<ManifestEntry> entries;
    std::vector<fs::path> paths;
    const bool manifest_mode = opt.inputs.size() == 1 && opt.inputs.front().extension() == ".json";
    if (manifest_mode)
    {
        const auto base = opt.inputs.front().parent_path();
        entries = read_manifest(opt.inputs.front());
        for (const auto &e : entries)
            paths.push_back(base / e.path);
    }
    else
    {
        paths = opt.inputs;
        entries.resize(paths.size());
    }
    if (paths.empty())
        fail(ErrorCode::data, "no traces to process");

    std::vector<VariancePhaseSeries> series(paths.size());
    parallel_for(paths.size(), opt.threads, [&](std::size_t i) {
        const auto trace = read_trace(paths[i]);
        if (manifest_mode && trace.kind != entries[i].kind)
            fail(ErrorCode::data, paths[i].string() + ": trace kind disagrees with the manifest");
        if (!manifest_mode)
            entries[i] = {paths[i].filename().string(), trace.kind, 0.0};
        series[i] = process_trace(trace, cfg.processing.pulses_per_bin, cfg.processing.trigger_offset);
    });

    // Group in input order: squeezed sets by power, then the references.
    std::vector<double> powers;
    std::map<double, std::vector<VariancePhaseSeries>> squeezed;
    std::vector<VariancePhaseSeries> shot, electronic;
    for (std::size_t i = 0; i < entries.size(); ++i)
    {
        switch (entries[i].kind)
        {
        case TraceKind::squeezed:
            if (!squeezed.contains(entries[i].avg_power_w))
                powers.push_back(entries[i].avg_power_w);
            squeezed[entries[i].avg_power_w].push_back(std::move(series[i]));
            break;
        case TraceKind::shot:
            shot.push_back(std::move(series[i]));
            break;
        case TraceKind::electronic:
            electronic.push_back(std::move(series[i]));
            break;
        }
    }
    if (shot.empty())
        fail(ErrorCode::data, "no shot-noise traces to normalise against");
    if (electronic.empty() && cfg.processing.subtract_electronic)
        fail(ErrorCode::data, "electronic-noise subtraction requested without electronic traces");

    const auto shot_agg = aggregate_traces(shot);
    VariancePhaseSeries elec_agg;
    if (electronic.empty())
    {
        elec_agg = shot_agg;
        for (auto &b : elec_agg.bins)
            b.variance = b.std_error = 0.0;
    }
    else
    {
        elec_agg = aggregate_traces(electronic);
    }

    fs::create_directories(opt.out_dir);
    json files = json::array();
    const auto shot_norm = normalize_to_shot(shot_agg, shot_agg, elec_agg, false);
    write_series_csv(opt.out_dir / "variance_shot.csv", shot_norm);
    files.push_back((opt.out_dir / "variance_shot.csv").string());
    if (!electronic.empty())
    {
        write_series_csv(opt.out_dir / "variance_electronic.csv", normalize_to_shot(elec_agg, shot_agg, elec_agg, false));
        files.push_back((opt.out_dir / "variance_electronic.csv").string());
    }

    FitOptions fit_opts;
    fit_opts.tol = cfg.fit.tol;
    fit_opts.max_iter = cfg.fit.max_iter;

    json summaries = json::array();
    for (std::size_t p = 0; p < powers.size(); ++p)
    {
        const auto agg = aggregate_traces(squeezed[powers[p]]);
        const auto norm = normalize_to_shot(agg, shot_agg, elec_agg, cfg.processing.subtract_electronic);
        const auto fit = fit_phase_curve(norm, fit_opts);

        const std::string stem = "p" + std::to_string(p);
        write_series_csv(opt.out_dir / ("variance_" + stem + ".csv"), norm);
        files.push_back((opt.out_dir / ("variance_" + stem + ".csv")).string());

        json s;
        s["avg_power_w"] = powers[p];
        s["peak_power_w"] = peak_power(pulses_at(cfg, powers[p]));
        s["s_minus_db"] = round_db(fit.s_minus_db);
        s["s_plus_db"] = round_db(fit.s_plus_db);
        s["errors"] = {{"s_minus_db", round_db(fit.s_minus_db_err)}, {"s_plus_db", round_db(fit.s_plus_db_err)}};
        s["s_minus_lin"] = fit.s_minus_lin;
        s["s_plus_lin"] = fit.s_plus_lin;
        s["s_minus_lin_err"] = fit.s_minus_lin_err;
        s["s_plus_lin_err"] = fit.s_plus_lin_err;
        s["ramp"] = {{"slope_rad_per_bin", fit.ramp_slope},
                     {"offset_rad", fit.ramp_offset},
                     {"slope_err", fit.ramp_slope_err},
                     {"offset_err", fit.ramp_offset_err}};
        s["n_traces"] = agg.n_traces;
        s["n_bins"] = norm.size();
        s["shot_reference_variance"] = norm.shot_reference_variance;
        s["electronic_reference_variance"] = norm.electronic_reference_variance;
        s["electronic_subtracted"] = cfg.processing.subtract_electronic;
        s["fit"] = {{"weighted_sse", fit.fit.sse}, {"iterations", fit.fit.iterations}, {"converged", fit.fit.converged}};
        s["warnings"] = norm.warnings;

        write_text(opt.out_dir / ("summary_" + stem + ".json"), s.dump(2) + "\n");
        files.push_back((opt.out_dir / ("summary_" + stem + ".json")).string());
        summaries.push_back(s);
    }
    write_text(opt.out_dir / "summary.json", summaries.dump(2) + "\n");
    files.push_back((opt.out_dir / "summary.json").string());

    return {{"summaries", summaries}, {"files", files}};
}

FitModel parse_fit_model(const std::string &name)
{
    if (name == "gain")
        return FitModel::gain;
    if (name == "squeezing")
        return FitModel::squeezing;
    fail(ErrorCode::invalid_argument, "unknown fit model '" + name + "' (gain|squeezing)");
}

namespace
{

Branch parse_branch(std::string s)
{
    if (s == "plus" || s == "+" || s == "+1")
        return Branch::plus;
    if (s == "minus" || s == "-" || s == "-1")
        return Branch::minus;
    fail(ErrorCode::data, "unknown branch '" + s + "'");
}

std::vector<AmplifierPoint> read_points_csv(const fs::path &path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorCode::data, "cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const bool with_sigma = line == "peak_power_w,value_db,branch,sigma_db";
    if (!with_sigma && line != "peak_power_w,value_db,branch")
        fail(ErrorCode::data, path.string() + ": expected header peak_power_w,value_db,branch[,sigma_db]");

    std::vector<AmplifierPoint> points;
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string f[4];
        const int want = with_sigma ? 4 : 3;
        for (int i = 0; i < want; ++i)
            if (!std::getline(ss, f[i], ','))
                fail(ErrorCode::data, path.string() + ": short row '" + line + "'");
        AmplifierPoint pt;
        try
        {
            pt.peak_power_w = std::stod(f[0]);
            pt.value_db = std::stod(f[1]);
            if (with_sigma)
                pt.sigma_db = std::stod(f[3]);
        }
        catch (const std::exception &)
        {
            fail(ErrorCode::data, path.string() + ": bad number in '" + line + "'");
        }
        pt.branch = parse_branch(f[2]);
        points.push_back(pt);
    }
    return points;
}

void append_summary_points(const json &s, std::vector<AmplifierPoint> &points)
{
    const double p = s.at("peak_power_w").get<double>();
    const auto &err = s.at("errors");
    points.push_back({p, s.at("s_minus_db").get<double>(), Branch::minus, err.at("s_minus_db").get<double>()});
    points.push_back({p, s.at("s_plus_db").get<double>(), Branch::plus, err.at("s_plus_db").get<double>()});
}

} // namespace

json cmd_fit(const RunConfig &cfg, const FitCommandOptions &opt)
{
    if (opt.inputs.empty())
        fail(ErrorCode::invalid_argument, "fit needs summary files or a points CSV");

    std::vector<AmplifierPoint> points;
    for (const auto &path : opt.inputs)
    {
        if (path.extension() == ".csv")
        {
            auto more = read_points_csv(path);
            points.insert(points.end(), more.begin(), more.end());
            continue;
        }
        std::ifstream in(path);
        if (!in)
            fail(ErrorCode::data, "cannot open " + path.string());
        try
        {
            const auto doc = json::parse(in);
            if (doc.is_array())
                for (const auto &s : doc)
                    append_summary_points(s, points);
            else
                append_summary_points(doc, points);
        }
        catch (const json::exception &e)
        {
            fail(ErrorCode::data, path.string() + ": " + e.what());
        }
    }

    CurveFitOptions options;
    options.lm.tol = cfg.fit.tol;
    options.lm.max_iter = cfg.fit.max_iter;
    if (opt.model == FitModel::squeezing && cfg.fit.fix_alpha)
        options.fixed_alpha = cfg.fit_alpha();

    const CurveFit fit =
        opt.model == FitModel::gain ? fit_gain_curve(points, options) : fit_squeezing_curve(points, options);

    json cov = json::array();
    for (Eigen::Index i = 0; i < fit.fit.covariance.rows(); ++i)
    {
        json row = json::array();
        for (Eigen::Index j = 0; j < fit.fit.covariance.cols(); ++j)
            row.push_back(fit.fit.covariance(i, j));
        cov.push_back(row);
    }
    const char *eta_name = opt.model == FitModel::gain ? "eta_mm" : "eta";
    json out;
    out["model"] = opt.model == FitModel::gain ? "gain" : "squeezing";
    out["params"] = {{eta_name, fit.eta}, {"alpha_per_w", fit.alpha_per_w}};
    out["std_errors"] = {{eta_name, fit.eta_err}, {"alpha_per_w", fit.alpha_err}};
    out["alpha_fixed"] = fit.alpha_fixed;
    out["covariance"] = cov;
    out["weighted_sse"] = fit.fit.sse;
    out["iterations"] = fit.fit.iterations;
    out["converged"] = fit.fit.converged;
    out["condition"] = fit.fit.condition;
    out["message"] = fit.fit.message;
    out["n_points"] = points.size();
    if (opt.out_file)
        write_text(*opt.out_file, out.dump(2) + "\n");
    return out;
}

json cmd_budget(const RunConfig &cfg, std::optional<double> measured_db)
{
    cfg.validate();
    const DetectionBudget b = cfg.detection_budget();
    auto entry = [](const char *name, double lin) {
        return json{{"name", name}, {"linear", lin}, {"db", round_db(linear_to_db(lin))}};
    };
    json entries = json::array();
    entries.push_back(entry("waveguide", b.eta_waveguide));
    entries.push_back(entry("optics", b.eta_optics));
    entries.push_back(entry("visibility", b.eta_visibility));
    entries.push_back(entry("quantum", b.eta_quantum));
    entries.push_back(entry("electronic", b.eta_electronic));
    entries.push_back(entry("homodyne", b.homodyne()));
    entries.push_back(entry("external", b.external()));
    entries.push_back(entry("total", budget_total(b).linear));

    json out;
    out["entries"] = entries;
    const double clearance = cfg.budget.clearance_db.value_or(cfg.acquisition.lo_clearance_db);
    out["raw"] = {{"clearance_db", std::isinf(clearance) ? json("inf") : json(clearance)},
                  {"eta_electronic_from_clearance", electronic_efficiency(clearance)}};
    if (cfg.budget.visibility)
        out["raw"]["eta_visibility_from_visibility"] = visibility_to_efficiency(*cfg.budget.visibility);

    const auto measured = measured_db ? measured_db : cfg.budget.measured_squeezing_db;
    if (measured)
    {
        const double ext = cfg.eta_external();
        out["inference"] = {{"measured_db", round_db(*measured)},
                            {"eta_external", ext},
                            {"eta_external_db", round_db(linear_to_db(ext))},
                            {"onchip_db", round_db(infer_onchip_squeezing(*measured, ext))}};
    }
    return out;
}

std::string budget_csv(const json &budget)
{
    std::ostringstream out;
    out << "name,linear,db\n";
    for (const auto &e : budget.at("entries"))
        out << e.at("name").get<std::string>() << ',' << full(e.at("linear").get<double>()) << ','
            << std::fixed << std::setprecision(4) << e.at("db").get<double>() << std::defaultfloat << '\n';
    return out.str();
}

json cmd_phasematch(const RunConfig &cfg, const PhasematchOptions &opt)
{
    cfg.validate();
    const double length = cfg.waveguide.length_m;
    const double span = opt.span_per_m > 0.0 ? opt.span_per_m : 4.0 * 2.0 * std::numbers::pi / length;
    const auto grid = linspace(-span, span, opt.points);

    const auto ideal = ideal_qpm_spectrum(grid, length);
    const auto map = PolingMap::defective(cfg.waveguide.poling_period_um, length, cfg.qpm.jitter,
                                          cfg.qpm.missing_flip_prob, cfg.qpm.seed);
    map.validate(length);
    const auto defective = defective_qpm_spectrum(map, grid);

    fs::create_directories(opt.out_dir);
    std::ostringstream csv;
    csv << "delta_k_per_m,ideal,defective\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        csv << full(grid[i]) << ',' << full(ideal[i]) << ',' << full(defective[i]) << '\n';
    write_text(opt.out_dir / "spectrum.csv", csv.str());

    json out;
    const auto dispersion_path =
        opt.dispersion_csv ? std::optional<std::string>(opt.dispersion_csv->string()) : cfg.qpm.dispersion_csv;
    double gvm = cfg.waveguide.gvm_ps_per_mm;
    if (dispersion_path)
    {
        gvm = gvm_from_dispersion(DispersionInput::from_csv_file(*dispersion_path), cfg.qpm.lambda_fund_nm);
        out["gvm_source"] = *dispersion_path;
    }
    else
    {
        out["gvm_source"] = "config";
    }
    out["length_m"] = length;
    out["gvm_ps_per_mm"] = gvm;
    out["walkoff_ps"] = temporal_walkoff_ps(gvm, length);
    out["n_domains"] = map.size();
    out["defects"] = {{"jitter", cfg.qpm.jitter}, {"missing_flip_prob", cfg.qpm.missing_flip_prob}, {"seed", cfg.qpm.seed}};
    out["peak_defective"] = *std::max_element(defective.begin(), defective.end());
    out["asymmetry"] = spectrum_asymmetry(grid, defective);

    const auto shape = parse_filter_shape(cfg.qpm.filter_shape);
    const double limit = filtered_pulse_duration(cfg.qpm.filter_fwhm_hz, shape);
    out["filter"] = {{"fwhm_hz", cfg.qpm.filter_fwhm_hz},
                     {"shape", cfg.qpm.filter_shape},
                     {"transform_limited_fwhm_s", limit},
                     {"gaussian_fwhm_s", filtered_pulse_duration(cfg.qpm.filter_fwhm_hz, FilterShape::gaussian)},
                     {"rectangular_fwhm_s", filtered_pulse_duration(cfg.qpm.filter_fwhm_hz, FilterShape::rectangular)},
                     {"observed_fwhm_s", cfg.qpm.observed_pulse_fwhm_s},
                     {"exceeds_transform_limit", cfg.qpm.observed_pulse_fwhm_s > limit}};
    out["spectrum_csv"] = (opt.out_dir / "spectrum.csv").string();
    write_text(opt.out_dir / "walkoff.json", out.dump(2) + "\n");
    return out;
}

namespace
{

json row(const std::string &quantity, double expected, double computed, double tolerance, const std::string &unit,
         std::optional<bool> pass = std::nullopt)
{
    const bool ok = pass.value_or(std::abs(computed - expected) <= tolerance);
    return {{"quantity", quantity}, {"expected", expected}, {"computed", computed},
            {"tolerance", tolerance}, {"unit", unit},     {"pass", ok}};
}

json info(const std::string &quantity, double reference, double computed, const std::string &unit,
          const std::string &note)
{
    return {{"quantity", quantity}, {"expected", reference}, {"computed", computed}, {"tolerance", nullptr},
            {"unit", unit},         {"pass", nullptr},       {"note", note}};
}

} // namespace

json cmd_report(const RunConfig &cfg, const std::optional<fs::path> &artifacts_dir)
{
    cfg.validate();
    json rows = json::array();

    rows.push_back(row("electronic efficiency at 8 dB clearance", 0.8415, electronic_efficiency(8.0), 5e-4, "1"));
    rows.push_back(row("mode-overlap efficiency from 92% visibility", 0.85, visibility_to_efficiency(0.92), 5e-3, "1"));
    const double hd = 0.85 * 0.98 * 0.84;
    rows.push_back(row("homodyne efficiency", 0.7, hd, 5e-3, "1"));
    rows.push_back(row("homodyne efficiency", -1.55, linear_to_db(hd), 0.01, "dB"));

    DetectionBudget reference_chain{db_to_linear(-0.29), db_to_linear(-4.57), 0.85, 0.98, 0.84};
    const auto total = budget_total(reference_chain);
    rows.push_back(row("total detection efficiency from known losses", 0.23, total.linear, 5e-3, "1"));
    rows.push_back(row("budget vs fitted efficiency (22 +- 4 %)", 0.22, total.linear, 0.04, "1"));

    const double ext = db_to_linear(-6.12);
    rows.push_back(row("inferred on-chip squeezing", -1.7, infer_onchip_squeezing(-0.33, ext), 0.4, "dB"));
    rows.push_back(row("total SHG efficiency for 4.7 mm", 28.0, normalized_to_total_efficiency(127.0, 0.47), 0.5, "%/W"));
    rows.push_back(row("temporal walk-off", 1.47, temporal_walkoff_ps(0.3128, 4.7e-3), 0.01, "ps"));

    const PulseTrain reference_pulse{310e-6, 100e6, 10e-12, 1.0};
    rows.push_back(row("peak pump power at 310 uW", 0.3, peak_power(reference_pulse), 0.015, "W"));
    rows.push_back(row("pulses per trace", 500000.0, 5e6 / 10.0, 0.0, "1"));
    rows.push_back(row("phase bins per trace", 100.0, 500000.0 / 5000.0, 0.0, "1"));

    const auto gain = parametric_gain(peak_power({290e-6, 100e6, 10e-12, 1.0}), 0.28, 0.95);
    rows.push_back(info("amplification at 290 uW (model)", 2.04, gain.g_plus_db, "dB",
                        "model evaluation; the reference is a measured point"));
    rows.push_back(info("deamplification at 290 uW (model)", -1.88, gain.g_minus_db, "dB",
                        "model evaluation; the reference is a measured point"));
    const auto sq = squeezing_levels(peak_power(reference_pulse), 0.28, 0.22);
    rows.push_back(info("squeezing at 310 uW (model)", -0.33, sq.s_minus_db, "dB",
                        "model evaluation; the reference is a measured point"));
    rows.push_back(info("anti-squeezing at 310 uW (model)", 0.48, sq.s_plus_db, "dB",
                        "model evaluation; the reference is a measured point"));
    rows.push_back(info("transform-limited duration behind 100 GHz (gaussian)", 12e-12,
                        filtered_pulse_duration(100e9, FilterShape::gaussian), "s",
                        "observed pulse is longer than the transform limit; not modelled"));

    // Configured run: budget and inference with the user's own numbers.
    const auto cfg_total = budget_total(cfg.detection_budget());
    rows.push_back(info("configured total detection efficiency", cfg.sweep.eta_total, cfg_total.linear, "1",
                        "configured budget vs configured sweep efficiency"));

    if (artifacts_dir)
    {
        const auto summary_path = *artifacts_dir / "summary.json";
        if (fs::exists(summary_path))
        {
            std::ifstream in(summary_path);
            const auto summaries = json::parse(in);
            for (const auto &s : summaries)
            {
                const double avg = s.at("avg_power_w").get<double>();
                const double peak = peak_power(pulses_at(cfg, avg));
                const auto expect = squeezing_levels(peak, cfg.sweep_alpha(), cfg.sweep.eta_total);
                const std::string tag = " at " + full(avg * 1e6) + " uW (fit vs injected)";
                const double em = s.at("s_minus_lin_err").get<double>();
                const double ep = s.at("s_plus_lin_err").get<double>();
                rows.push_back(row("squeezing" + tag, expect.s_minus_lin, s.at("s_minus_lin").get<double>(), 3.0 * em,
                                   "1 (linear)"));
                rows.push_back(row("anti-squeezing" + tag, expect.s_plus_lin, s.at("s_plus_lin").get<double>(),
                                   3.0 * ep, "1 (linear)"));
            }
        }
        const auto fit_path = *artifacts_dir / "fit.json";
        if (fs::exists(fit_path))
        {
            std::ifstream in(fit_path);
            const auto fit = json::parse(in);
            if (fit.value("model", "") == "squeezing")
                rows.push_back(row("fitted detection efficiency vs injected", cfg.sweep.eta_total,
                                   fit.at("params").at("eta").get<double>(),
                                   3.0 * fit.at("std_errors").at("eta").get<double>(), "1"));
        }
    }
    return {{"rows", rows}};
}

bool report_passed(const json &report)
{
    for (const auto &r : report.at("rows"))
        if (r.at("pass").is_boolean() && !r.at("pass").get<bool>())
            return false;
    return true;
}

std::string report_text(const json &report)
{
    std::ostringstream out;
    out << std::left << std::setw(62) << "quantity" << std::setw(14) << "expected" << std::setw(14) << "computed"
        << std::setw(12) << "tolerance" << "result\n";
    for (const auto &r : report.at("rows"))
    {
        auto num = [](const json &v) {
            if (v.is_null())
                return std::string("-");
            std::ostringstream s;
            s << std::setprecision(6) << v.get<double>();
            return s.str();
        };
        const auto &p = r.at("pass");
        out << std::setw(62) << (r.at("quantity").get<std::string>() + " [" + r.at("unit").get<std::string>() + "]")
            << std::setw(14) << num(r.at("expected")) << std::setw(14) << num(r.at("computed")) << std::setw(12)
            << num(r.at("tolerance")) << (p.is_null() ? "info" : p.get<bool>() ? "PASS" : "FAIL") << '\n';
    }
    return out.str();
}

std::string report_csv(const json &report)
{
    std::ostringstream out;
    out << "quantity,unit,expected,computed,tolerance,pass\n";
    for (const auto &r : report.at("rows"))
    {
        auto num = [](const json &v) { return v.is_null() ? std::string() : full(v.get<double>()); };
        const auto &p = r.at("pass");
        out << '"' << r.at("quantity").get<std::string>() << "\"," << r.at("unit").get<std::string>() << ','
            << num(r.at("expected")) << ',' << num(r.at("computed")) << ',' << num(r.at("tolerance")) << ','
            << (p.is_null() ? "" : p.get<bool>() ? "true" : "false") << '\n';
    }
    return out.str();
}

} // namespace sqz
