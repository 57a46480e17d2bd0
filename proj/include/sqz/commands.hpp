#ifndef SQZ_COMMANDS_HPP
#define SQZ_COMMANDS_HPP

// Subcommand bodies behind the `sqz` executable. Each returns the JSON it would
// print and writes its artifacts under the given output directory.

#include "sqz/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sqz
{

enum class OutputFormat
{
    json,
    csv,
};

/// dB values are serialised rounded to 4 decimal places.
double round_db(double db);

struct SimulateOptions
{
    std::filesystem::path out_dir = "traces";
    unsigned threads = 1;
};

/// Power sweep -> SQZT traces + manifest.json. Result lists seed and SHA-256 digests.
nlohmann::json cmd_simulate(const RunConfig &cfg, const SimulateOptions &opt);

struct ProcessOptions
{
    std::vector<std::filesystem::path> inputs; // one manifest.json, or trace files
    std::filesystem::path out_dir = "processed";
    unsigned threads = 1;
};

/// Trace files -> per-power variance CSVs and summaries (summary.json collects them).
nlohmann::json cmd_process(const RunConfig &cfg, const ProcessOptions &opt);

enum class FitModel
{
    gain,
    squeezing,
};

FitModel parse_fit_model(const std::string &name);

struct FitCommandOptions
{
    std::vector<std::filesystem::path> inputs; // summary JSON files or a points CSV
    FitModel model = FitModel::squeezing;
    std::optional<std::filesystem::path> out_file;
};

/// Points CSV header: peak_power_w,value_db,branch[,sigma_db]; branch is plus/minus (or +/-).
nlohmann::json cmd_fit(const RunConfig &cfg, const FitCommandOptions &opt);

nlohmann::json cmd_budget(const RunConfig &cfg, std::optional<double> measured_db = std::nullopt);
std::string budget_csv(const nlohmann::json &budget);

struct PhasematchOptions
{
    std::optional<std::filesystem::path> dispersion_csv; // overrides qpm.dispersion_csv
    double span_per_m = 0.0;                             // 0 -> four nulls either side
    std::size_t points = 801;
    std::filesystem::path out_dir = "phasematch";
};

/// Writes spectrum.csv (delta_k_per_m,ideal,defective) and returns the walk-off report.
nlohmann::json cmd_phasematch(const RunConfig &cfg, const PhasematchOptions &opt);

/// Table of reference quantities: expected, computed, tolerance, pass.
/// If artifacts_dir holds a processed summary.json, fitted levels are checked too.
nlohmann::json cmd_report(const RunConfig &cfg, const std::optional<std::filesystem::path> &artifacts_dir);
std::string report_text(const nlohmann::json &report);
std::string report_csv(const nlohmann::json &report);
bool report_passed(const nlohmann::json &report);

} // namespace sqz

#endif // SQZ_COMMANDS_HPP
