#pragma once

#include "nashseek/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nashseek {

/// Columns: k, t, x0..x{m-1}, [xi0..xi{m-1}], dist, V. xi columns are present
/// for zeroth-order runs only. V is ||x - x*||^2, Gamma^{-1}-weighted for
/// asynchronous runs.
struct TrajectoryLog {
    std::string config_hash;
    std::string algorithm;
    Vector x_star;
    std::vector<std::size_t> dims;
    std::vector<Eigen::Vector2d> sources;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t dim() const { return static_cast<std::size_t>(x_star.size()); }
    bool has_xi() const;
    std::size_t column(const std::string& name) const;
    Vector x_at(std::size_t row) const;
};

struct ExperimentResult {
    TrajectoryLog log;
    Vector frequencies;  // empty for full-information runs
    double final_distance = 0.0;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;
};

/// Deterministic given the config. Aborts with ConvergenceFailure when
/// ||x - x*|| exceeds 1e6 and with AssumptionViolation on resonant frequencies.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_log_csv(const TrajectoryLog& log, std::ostream& out);
void write_log_csv(const TrajectoryLog& log, const std::string& path);
TrajectoryLog read_log_csv(const std::string& path);
TrajectoryLog read_log_csv(std::istream& in);

/// Rows of the form "k,t,agent" over one epoch, with a header line.
void write_schedule_csv(const TimerSchedule& schedule, std::ostream& out);

}  // namespace nashseek
