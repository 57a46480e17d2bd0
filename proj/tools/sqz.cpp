// sqz: simulate, process and fit pulsed homodyne squeezing measurements.
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 fit non-convergence.

#include "sqz/commands.hpp"
#include "sqz/error.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <thread>

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

enum Exit
{
    exit_ok = 0,
    exit_config = 2,
    exit_data = 3,
    exit_fit = 4,
};

int report_error(int code, const std::string &kind, const std::string &message)
{
    std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
    return code;
}

int exit_code_for(sqz::ErrorCode code)
{
    switch (code)
    {
    case sqz::ErrorCode::config:
        return exit_config;
    case sqz::ErrorCode::singular:
    case sqz::ErrorCode::not_converged:
        return exit_fit;
    default:
        return exit_data;
    }
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Pulsed squeezing toolkit: simulate, process and fit homodyne traces"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string format = "json";

    app.add_option("--config", config_path, "Run configuration (JSON)")->envname("SQZ_CONFIG");
    app.add_option("--seed", seed, "Master seed (overrides acquisition.seed and qpm.seed)")->envname("SQZ_SEED");
    app.add_option("--out", out, "Output directory (or file for fit)")->envname("SQZ_OUT");
    app.add_option("--threads", threads, "Worker threads")->envname("SQZ_THREADS")->check(CLI::PositiveNumber);
    app.add_option("--format", format, "Output format")
        ->envname("SQZ_FORMAT")
        ->check(CLI::IsMember({"json", "csv"}));

    auto *simulate = app.add_subcommand("simulate", "Write synthetic SQZT traces for a power sweep");

    std::vector<std::string> process_inputs;
    auto *process = app.add_subcommand("process", "Trace files -> variance CSVs and JSON summaries");
    process->add_option("inputs", process_inputs, "manifest.json or .sqzt files")->required();

    std::vector<std::string> fit_inputs;
    std::string model = "squeezing";
    auto *fit = app.add_subcommand("fit", "Fit the gain or squeezing law to summaries or a points CSV");
    fit->add_option("inputs", fit_inputs, "summary JSON files or points CSV")->required();
    fit->add_option("--model", model, "gain|squeezing")->check(CLI::IsMember({"gain", "squeezing"}));

    std::optional<double> measured_db;
    auto *budget = app.add_subcommand("budget", "Detection-efficiency table and on-chip inference");
    budget->add_option("--measured-db", measured_db, "Measured squeezing to correct for external loss");

    std::string dispersion;
    double span = 0.0;
    std::size_t points = 801;
    auto *phasematch = app.add_subcommand("phasematch", "QPM spectrum (ideal and defective) and walk-off");
    phasematch->add_option("--dispersion", dispersion, "CSV band,wavelength_nm,n_eff,n_g");
    phasematch->add_option("--span", span, "Half-width of the detuning grid in rad/m (default: four nulls)");
    phasematch->add_option("--points", points, "Grid points")->check(CLI::Range(2, 1000000));

    std::string artifacts;
    auto *report = app.add_subcommand("report", "Reference quantities: expected vs computed");
    report->add_option("--artifacts", artifacts, "Directory holding summary.json / fit.json");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        return report_error(exit_config, "usage", e.what());
    }

    const auto fmt = format == "csv" ? sqz::OutputFormat::csv : sqz::OutputFormat::json;

    try
    {
        sqz::RunConfig cfg = config_path.empty() ? sqz::RunConfig{} : sqz::load_config(config_path);
        if (seed)
        {
            cfg.acquisition.seed = *seed;
            cfg.qpm.seed = *seed;
        }
        cfg.validate();

        json result;
        int code = exit_ok;
        std::string text;

        if (*simulate)
        {
            result = sqz::cmd_simulate(cfg, {out.empty() ? fs::path("traces") : fs::path(out), threads});
        }
        else if (*process)
        {
            sqz::ProcessOptions opt;
            opt.inputs.assign(process_inputs.begin(), process_inputs.end());
            opt.out_dir = out.empty() ? fs::path("processed") : fs::path(out);
            opt.threads = threads;
            result = sqz::cmd_process(cfg, opt);
        }
        else if (*fit)
        {
            sqz::FitCommandOptions opt;
            opt.inputs.assign(fit_inputs.begin(), fit_inputs.end());
            opt.model = sqz::parse_fit_model(model);
            if (!out.empty())
                opt.out_file = fs::path(out);
            result = sqz::cmd_fit(cfg, opt);
        }
        else if (*budget)
        {
            result = sqz::cmd_budget(cfg, measured_db);
            if (fmt == sqz::OutputFormat::csv)
                text = sqz::budget_csv(result);
        }
        else if (*phasematch)
        {
            sqz::PhasematchOptions opt;
            if (!dispersion.empty())
                opt.dispersion_csv = fs::path(dispersion);
            opt.span_per_m = span;
            opt.points = points;
            opt.out_dir = out.empty() ? fs::path("phasematch") : fs::path(out);
            result = sqz::cmd_phasematch(cfg, opt);
        }
        else if (*report)
        {
            result = sqz::cmd_report(cfg, artifacts.empty() ? std::nullopt : std::optional<fs::path>(artifacts));
            text = fmt == sqz::OutputFormat::csv ? sqz::report_csv(result) : std::string();
            if (!sqz::report_passed(result))
                code = exit_data;
            if (!out.empty())
            {
                fs::create_directories(out);
                std::ofstream(fs::path(out) / "report.json") << result.dump(2) << '\n';
                std::ofstream(fs::path(out) / "report.txt") << sqz::report_text(result);
            }
        }

        if (!text.empty())
            std::cout << text;
        else
            std::cout << result.dump(2) << std::endl;
        return code;
    }
    catch (const sqz::Error &e)
    {
        return report_error(exit_code_for(e.code()), sqz::to_string(e.code()), e.what());
    }
    catch (const json::exception &e)
    {
        return report_error(exit_data, "data", e.what());
    }
    catch (const std::exception &e)
    {
        return report_error(exit_data, "data", e.what());
    }
}
