#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ifl/lattice.hpp"
#include "ifl/oracle.hpp"
#include "ifl/sampler.hpp"

namespace ifl {

inline constexpr const char* library_version = "ifl-0.1.0";

enum class ExperimentKind { gaussian_scaling, testfn_scaling, tail_check, oracle_validate };

const char* to_string(ExperimentKind kind) noexcept;
std::optional<ExperimentKind> parse_kind(const std::string& text);

struct DisorderDistribution {
    enum class Type { zero, gaussian, rademacher } type = Type::zero;
    double scale = 0.0; // σ for gaussian, ε for rademacher

    std::string label() const;
};

struct ExperimentConfig {
    std::optional<ExperimentKind> kind;
    std::vector<int> sizes;            // N values
    std::vector<double> levels;        // tail levels T
    std::string output = "ifl-out";

    std::vector<Offset> kernel_offsets; // empty = nearest neighbour
    std::string kernel_label = "nearest-neighbor";

    std::string potential = "quadratic";
    double beta = 0.0;
    std::optional<double> declared_curvature;

    std::vector<DisorderDistribution> distributions{DisorderDistribution{}};
    int draws = 1;
    std::uint64_t seed = 1;

    ChainConfig chain;

    QuadratureSpec quadrature;
    int bins = 40;
    double bin_range = 4.0;

    std::vector<int> radii{1, 2, 4, 8, 16, 32};

    std::string canonical_text; // normalized key=value dump, input to the config hash

    WalkKernel make_kernel() const;
    /// Built-in potential with the declared ceiling; throws ConfigError if the ceiling fails the spot check.
    Potential make_potential() const;
};

/// Parses the INI-style config text. Throws Error(config_error) with the offending key.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a of the canonical config text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Interior disorder field of draw `k`, reproducible from (master seed, k) alone.
Field draw_disorder(const BoxGeometry& geom, const ExperimentConfig& config, int k);

struct CheckResult {
    std::string name;
    std::string status; // "pass", "fail", "inconclusive", "info"
    std::string detail;
};

struct RunReport {
    int exit_code = 0; // 0 pass/inconclusive, 2 any hard failure
    std::vector<std::filesystem::path> files;
    std::vector<CheckResult> checks;
};

struct RunOptions {
    std::optional<std::filesystem::path> out_dir;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
};

/// Runs one experiment, writes `<out>/<kind>.csv` (plus auxiliaries) and `<out>/<kind>_summary.json`.
RunReport run_experiment(ExperimentKind kind, ExperimentConfig config, const RunOptions& options);

} // namespace ifl
