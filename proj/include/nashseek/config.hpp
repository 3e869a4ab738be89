#pragma once

// Experiment configuration, read from YAML. See README.md for the schema.

#include "nashseek/async_engine.hpp"
#include "nashseek/game.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nashseek {

enum class Algorithm { fb, zo_sync, async_fi, async_zo };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);
bool is_async(Algorithm a);
bool is_zeroth_order(Algorithm a);

struct GameSpec {
    std::string kind = "connectivity";  // connectivity | quadratic
    std::vector<Eigen::Vector2d> sources;
    double coupling = 0.0;
    std::vector<std::size_t> dims;
    Matrix jacobian;
    Vector shift;
    /// One set per agent, or empty for whole-space.
    std::vector<ConstraintSet> constraints;
};

struct AvgSpec {
    std::vector<std::uint64_t> n_list{100, 1000, 10000};
    std::vector<double> eps_list{0.1, 0.05, 0.025};
};

struct ExperimentConfig {
    GameSpec game;
    Algorithm algorithm = Algorithm::fb;

    double alpha = 0.1;
    double beta = 0.01;
    double gamma = 0.1;
    /// True when tuning.gamma appears in the file (asynchronous runs ignore it).
    bool gamma_given = false;
    double lambda = 1.0;
    /// Per-agent dither amplitudes; a single entry is broadcast.
    std::vector<double> amplitudes{0.1};
    std::optional<Vector> frequencies;
    std::optional<std::uint64_t> frequency_seed;

    std::vector<double> periods;
    std::vector<double> tau0;

    std::uint64_t horizon = 1000;
    /// Rows are logged every log_every steps; 0 picks r for async runs, 1 otherwise.
    std::uint64_t log_every = 0;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    std::optional<Vector> x0;
    /// Radius of the ball around x* inside which Lyapunov increases are not judged.
    std::optional<double> rho;

    AvgSpec avg;

    /// Raw YAML text, used for the config hash.
    std::string source_text;

    /// Throws std::invalid_argument with a readable message on bad input.
    void validate() const;
    std::uint64_t seed_for_frequencies() const { return frequency_seed.value_or(seed); }
};

ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the raw text plus the effective seed and horizon, in hex.
std::string config_hash(const ExperimentConfig& cfg);

GameDefinition build_game(const ExperimentConfig& cfg);
TimerSchedule build_schedule(const ExperimentConfig& cfg);

/// Explicit frequencies if configured, otherwise seeded generation validated
/// for the algorithm (synchronous or asynchronous resonance rules).
Vector resolve_frequencies(const ExperimentConfig& cfg, const GameDefinition& game);
FrequencyReport check_frequencies(const ExperimentConfig& cfg, const GameDefinition& game,
                                  const Vector& freqs);

std::vector<double> agent_amplitudes(const ExperimentConfig& cfg, std::size_t agent_count);

}  // namespace nashseek
