#pragma once

#include "fujita/mu_library.hpp"
#include "fujita/operator_model.hpp"
#include "fujita/spectral_solver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fujita {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kOutputDirEnv = "FUJITA_OUTPUT_DIR";

struct SweepSpec {
    std::string parameter;  // gamma | amplitude | p | n | N | dt
    std::vector<double> values;
};

struct ExperimentConfig {
    std::optional<EvolutionOperator> op;
    int ell = 0;
    /// Nonlinearity block; absent means a linear run.
    bool nonlinear = false;
    bool p_critical = false;
    double p = 1.0;
    MuSpec mu = MuSpec::constant();

    Grid grid;
    double dt = 0.01;
    double T = 1.0;
    double amplitude = 1.0;
    DataProfile profile = DataProfile::gaussian(1.0);
    int cadence = 1;
    bool record_fields = false;
    double blowup_factor = 1e6;

    std::optional<SweepSpec> sweep;
    std::string output_dir = "fujita_out";
    std::uint64_t seed = 0;
};

/// Parses a schema-versioned config. Unknown keys are rejected; a relative operator
/// path is resolved against `base_dir`.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// p_c of (op, ell) as a usable exponent; throws ValidationError when infinite or <= 1.
double resolve_critical_p(const EvolutionOperator& op, int ell);

/// Exponent actually used by the config (resolving "critical").
double effective_p(const ExperimentConfig& cfg);

RunConfig make_run_config(const ExperimentConfig& cfg);

struct SweepEntry {
    double value = 0.0;
    std::optional<double> p;
    std::optional<RunReport> report;
    std::string error;
};

struct SweepReport {
    std::string parameter;
    std::vector<SweepEntry> entries;
};

/// Applies one sweep value to a copy of the config (re-resolving "critical" p).
ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const std::string& parameter, double value);

/// One run per value in list order; failures are recorded per entry.
SweepReport run_sweep(const ExperimentConfig& cfg);

/// Output directory: explicit flag, else $FUJITA_OUTPUT_DIR, else the config value.
std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag, const std::string& config_value);

std::string format_double(double v);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// run.json, series.csv and (when recorded) fields.csv + data.csv.
void emit_run(const std::filesystem::path& dir, const RunReport& report, const nlohmann::json& config_block);
/// Reads back what emit_run wrote, including recorded fields.
RunReport load_recorded_run(const std::filesystem::path& dir, nlohmann::json* config_block = nullptr);

/// sweep.json, index.csv and series_<i>.csv.
void emit_sweep(const std::filesystem::path& dir, const SweepReport& report, const nlohmann::json& config_block);

nlohmann::json config_block(const ExperimentConfig& cfg);

}  // namespace fujita
