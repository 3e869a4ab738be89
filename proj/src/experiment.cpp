#include "nashseek/experiment.hpp"

#include "nashseek/async_engine.hpp"
#include "nashseek/sync_seek.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace nashseek {

bool TrajectoryLog::has_xi() const {
    for (const auto& c : columns) {
        if (c == "xi0") return true;
    }
    return false;
}

std::size_t TrajectoryLog::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw std::out_of_range("log has no column '" + name + "'");
}

Vector TrajectoryLog::x_at(std::size_t row) const {
    const std::size_t first = column("x0");
    Vector x(static_cast<Eigen::Index>(dim()));
    for (std::size_t l = 0; l < dim(); ++l) x(static_cast<Eigen::Index>(l)) = rows.at(row)[first + l];
    return x;
}

namespace {

constexpr double divergence_limit = 1e6;

struct Recorder {
    TrajectoryLog& log;
    const Vector& xs;
    std::uint64_t cadence;
    Vector weights;  // diag(Gamma^{-1}) or ones

    void record(std::uint64_t k, double t, const Vector& x, const Vector* xi) {
        std::vector<double> row;
        row.reserve(log.columns.size());
        row.push_back(static_cast<double>(k));
        row.push_back(t);
        for (Eigen::Index l = 0; l < x.size(); ++l) row.push_back(x(l));
        if (xi != nullptr) {
            for (Eigen::Index l = 0; l < xi->size(); ++l) row.push_back((*xi)(l));
        }
        const Vector e = x - xs;
        row.push_back(e.norm());
        row.push_back(weights.dot(e.cwiseAbs2()));
        log.rows.push_back(std::move(row));
    }
};

void check_divergence(const Vector& x, const Vector& xs, std::uint64_t k) {
    const double dist = (x - xs).norm();
    if (!(dist <= divergence_limit)) {
        std::ostringstream msg;
        msg << "trajectory diverged at step " << k << ": ||x - x*|| = " << dist
            << " exceeds " << divergence_limit << "; reduce the step sizes";
        throw ConvergenceFailure(msg.str());
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result;
    const GameDefinition game = build_game(cfg);
    const Vector xs = solve_ne_oracle(game);
    const auto m = static_cast<Eigen::Index>(game.dim());

    Vector x = cfg.x0 ? *cfg.x0 : game.project(Vector::Zero(m));
    if (!game.feasible(x)) throw std::invalid_argument("x0 is not in the constraint set");

    const bool async = is_async(cfg.algorithm);
    const bool zo = is_zeroth_order(cfg.algorithm);
    std::optional<TimerSchedule> schedule;
    if (async) {
        schedule = build_schedule(cfg);
        if (!game.unconstrained()) {
            result.warnings.push_back(
                "asynchronous algorithms do not project; constraint sets are ignored");
        }
        if (cfg.gamma_given) {
            result.warnings.push_back("tuning.gamma is not used by asynchronous algorithms");
        }
    }
    if (zo) {
        result.frequencies = resolve_frequencies(cfg, game);
        const FrequencyReport rep = check_frequencies(cfg, game, result.frequencies);
        if (!rep.valid()) {
            throw AssumptionViolation("resonant dither frequencies: " +
                                      rep.violations.front().describe());
        }
    }

    TrajectoryLog& log = result.log;
    log.config_hash = config_hash(cfg);
    log.algorithm = to_string(cfg.algorithm);
    log.x_star = xs;
    log.dims.assign(game.dims().begin(), game.dims().end());
    if (game.connectivity()) log.sources = game.connectivity()->sources;
    log.columns = {"k", "t"};
    for (Eigen::Index l = 0; l < m; ++l) log.columns.push_back("x" + std::to_string(l));
    if (zo) {
        for (Eigen::Index l = 0; l < m; ++l) log.columns.push_back("xi" + std::to_string(l));
    }
    log.columns.push_back("dist");
    log.columns.push_back("V");

    const std::uint64_t cadence =
        cfg.log_every > 0 ? cfg.log_every : (async ? schedule->epoch_length : 1);
    Recorder rec{log, xs, cadence,
                 async ? Vector(gamma_weights(game, *schedule).cwiseInverse())
                       : Vector(Vector::Ones(m))};
    log.rows.reserve(cfg.horizon / cadence + 1);

    const SyncZOParams params{cfg.alpha, cfg.beta, cfg.gamma};
    switch (cfg.algorithm) {
        case Algorithm::fb: {
            rec.record(0, 0.0, x, nullptr);
            for (std::uint64_t k = 1; k <= cfg.horizon; ++k) {
                x = fb_step(game, x, cfg.lambda, cfg.gamma);
                check_divergence(x, xs, k);
                if (k % cadence == 0) rec.record(k, static_cast<double>(k), x, nullptr);
            }
            break;
        }
        case Algorithm::zo_sync: {
            OscillatorBank bank = OscillatorBank::for_game(
                game, result.frequencies, agent_amplitudes(cfg, game.agent_count()));
            SyncZOState state = make_sync_state(game, x, std::move(bank));
            rec.record(0, 0.0, state.x, &state.filter.xi);
            for (std::uint64_t k = 1; k <= cfg.horizon; ++k) {
                state = zo_sync_step(game, state, params);
                check_divergence(state.x, xs, k);
                if (k % cadence == 0) rec.record(k, static_cast<double>(k), state.x, &state.filter.xi);
            }
            x = state.x;
            break;
        }
        case Algorithm::async_fi: {
            rec.record(0, 0.0, x, nullptr);
            for (std::uint64_t k = 1; k <= cfg.horizon; ++k) {
                x = async_fi_step(game, x, *schedule, k - 1, cfg.alpha);
                check_divergence(x, xs, k);
                if (k % cadence == 0) rec.record(k, schedule->time_at(k - 1), x, nullptr);
            }
            break;
        }
        case Algorithm::async_zo: {
            OscillatorBank bank = OscillatorBank::for_game(
                game, result.frequencies, agent_amplitudes(cfg, game.agent_count()));
            AsyncState state = make_async_state(game, x, std::move(bank));
            rec.record(0, 0.0, state.x, &state.xi);
            for (std::uint64_t k = 1; k <= cfg.horizon; ++k) {
                state = async_zo_step(game, state, *schedule, params);
                check_divergence(state.x, xs, k);
                if (k % cadence == 0) rec.record(k, state.t, state.x, &state.xi);
            }
            x = state.x;
            break;
        }
    }
    result.final_distance = (x - xs).norm();
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

namespace {

std::string join(const Vector& v) {
    std::ostringstream out;
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
    return out.str();
}

std::vector<double> split_numbers(const std::string& s) {
    std::istringstream in(s);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

}  // namespace

void write_log_csv(const TrajectoryLog& log, std::ostream& out) {
    out << "# config_hash: " << log.config_hash << "\n";
    out << "# algorithm: " << log.algorithm << "\n";
    out << "# x_star: " << join(log.x_star) << "\n";
    out << "# dims:";
    for (auto d : log.dims) out << " " << d;
    out << "\n";
    if (!log.sources.empty()) {
        out << "# sources:" << std::setprecision(17);
        for (const auto& s : log.sources) out << " " << s(0) << " " << s(1);
        out << "\n";
    }
    for (std::size_t c = 0; c < log.columns.size(); ++c) out << (c ? "," : "") << log.columns[c];
    out << "\n" << std::setprecision(17);
    for (const auto& row : log.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << "\n";
    }
}

void write_log_csv(const TrajectoryLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write log file '" + path + "'");
    write_log_csv(log, out);
}

TrajectoryLog read_log_csv(std::istream& in) {
    TrajectoryLog log;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(2, colon - 2);
            const std::string value = line.substr(colon + 1);
            if (key == "config_hash") {
                std::istringstream(value) >> log.config_hash;
            } else if (key == "algorithm") {
                std::istringstream(value) >> log.algorithm;
            } else if (key == "x_star") {
                const auto v = split_numbers(value);
                log.x_star = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
            } else if (key == "dims") {
                for (double d : split_numbers(value)) log.dims.push_back(static_cast<std::size_t>(d));
            } else if (key == "sources") {
                const auto v = split_numbers(value);
                for (std::size_t i = 0; i + 1 < v.size(); i += 2) log.sources.emplace_back(v[i], v[i + 1]);
            }
            continue;
        }
        if (!header_seen) {
            std::istringstream cols(line);
            std::string c;
            while (std::getline(cols, c, ',')) log.columns.push_back(c);
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != log.columns.size()) {
            throw std::runtime_error("log row has " + std::to_string(row.size()) +
                                     " cells, expected " + std::to_string(log.columns.size()));
        }
        log.rows.push_back(std::move(row));
    }
    if (!header_seen) throw std::runtime_error("log has no column header");
    if (log.x_star.size() == 0) throw std::runtime_error("log has no x_star header line");
    return log;
}

TrajectoryLog read_log_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read log file '" + path + "'");
    return read_log_csv(in);
}

void write_schedule_csv(const TimerSchedule& schedule, std::ostream& out) {
    out << "k,t,agent,agent_mask\n" << std::setprecision(17);
    for (std::size_t k = 0; k < schedule.events.size(); ++k) {
        const auto& ev = schedule.events[k];
        std::string mask(schedule.agent_count(), '0');
        mask[ev.agent] = '1';
        out << k << "," << ev.time << "," << ev.agent << "," << mask << "\n";
    }
}

}  // namespace nashseek
