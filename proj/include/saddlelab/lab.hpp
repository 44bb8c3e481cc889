#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace saddlelab::lab {

inline constexpr std::string_view kToolVersion = "0.3.0";

enum class Experiment {
    Simulate,
    EscapeSweep,
    GdStall,
    CompareOrbits,
    StableManifold,
    TaylorCheck,
    GlobalBound,
};

std::string_view to_string(Experiment e);
std::optional<Experiment> experiment_from_string(std::string_view name);
bool is_randomized(Experiment e);

/// One fully-resolved run description. Built from a flat JSON object whose
/// keys mirror the CLI flags (without leading dashes).
struct ExperimentConfig {
    Experiment experiment = Experiment::Simulate;
    std::string function_spec;
    std::optional<std::uint64_t> seed;
    std::filesystem::path output_dir = "results";

    // Shared numeric parameters.
    std::optional<double> r;  // defaults depend on the experiment
    double C = 5.0;
    std::size_t n_ic = 256;
    std::optional<std::vector<double>> saddle;  // defaults to the origin
    std::optional<std::vector<double>> x0;

    // Integrator.
    double t_max = 100.0;
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    double max_step = 0.05;
    double grad_stop = 1e-10;
    double event_tol = 1e-13;

    // simulate
    std::string flow = "ngd";
    double alpha = 1e-3;
    std::size_t steps = 1000;

    // gd-stall
    std::vector<double> eps = {1e-2, 1e-3, 1e-4};
    std::optional<double> theta;

    // compare-orbits
    double s_max = 2.0;

    // taylor-check
    double C1 = 0.6;
    double C2 = 0.9;
    std::optional<double> r_hat;
    std::size_t n_samples = 100000;

    // global-bound
    double R = 4.0;
    std::optional<double> nu;

    /// Validates and converts. Unknown keys, non-positive tolerances and a
    /// missing seed for randomized experiments throw ConfigError.
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct EmittedFile {
    std::string name;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct Verdict {
    std::string check;
    bool pass = true;
    std::string detail;
};

struct RunManifest {
    std::string tool_version{kToolVersion};
    nlohmann::json config;
    std::string started_at;
    std::string finished_at;
    std::filesystem::path run_dir;
    std::vector<EmittedFile> files;
    std::vector<Verdict> verdicts;
    int exit_code = 0;
    std::optional<std::string> error_kind;
    std::optional<std::string> error_message;

    nlohmann::json to_json() const;
};

/// Files produced by an experiment, before they are written.
struct Payload {
    std::string name;
    std::string contents;
};

struct ExperimentResult {
    std::vector<Payload> payloads;
    std::vector<Verdict> verdicts;
};

/// Runs the experiment in memory and returns its payload files and verdicts.
/// Deterministic in (config, seed). Throws the experiment's errors.
ExperimentResult execute(const ExperimentConfig& config);

/// Executes, writes every payload plus manifest.json into
/// <output_dir>/<experiment>-<seed>-<timestamp>/, and returns the manifest.
/// BoundViolated/AssumptionViolated are caught and reported with exit code 2;
/// other errors propagate.
RunManifest run(const ExperimentConfig& config);

/// Full command-line entry point; returns the process exit code
/// (0 pass, 1 usage/config error, 2 bound or assumption violated).
int run_cli(int argc, const char* const* argv);

}  // namespace saddlelab::lab
