#include "nashseek/config.hpp"

#include "nashseek/sync_seek.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace nashseek {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::fb:
            return "fb";
        case Algorithm::zo_sync:
            return "zo-sync";
        case Algorithm::async_fi:
            return "async-fi";
        case Algorithm::async_zo:
            return "async-zo";
    }
    return "?";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "fb") return Algorithm::fb;
    if (name == "zo-sync") return Algorithm::zo_sync;
    if (name == "async-fi") return Algorithm::async_fi;
    if (name == "async-zo") return Algorithm::async_zo;
    throw std::invalid_argument("unknown algorithm '" + name +
                                "' (expected fb, zo-sync, async-fi or async-zo)");
}

bool is_async(Algorithm a) { return a == Algorithm::async_fi || a == Algorithm::async_zo; }
bool is_zeroth_order(Algorithm a) { return a == Algorithm::zo_sync || a == Algorithm::async_zo; }

namespace {

Vector to_vector(const YAML::Node& node, const std::string& what) {
    if (!node.IsSequence()) throw std::invalid_argument(what + " must be a list of numbers");
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = node[i].as<double>();
    return v;
}

Matrix to_matrix(const YAML::Node& node, const std::string& what) {
    if (!node.IsSequence() || node.size() == 0) {
        throw std::invalid_argument(what + " must be a list of rows");
    }
    const auto rows = static_cast<Eigen::Index>(node.size());
    const auto cols = static_cast<Eigen::Index>(node[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = to_vector(node[static_cast<std::size_t>(r)], what);
        if (row.size() != cols) throw std::invalid_argument(what + " rows differ in length");
        m.row(r) = row.transpose();
    }
    return m;
}

ConstraintSet to_constraint(const YAML::Node& node, std::size_t dim) {
    if (node.IsScalar() && node.as<std::string>() == "whole-space") {
        return ConstraintSet::whole_space(dim);
    }
    if (node["box"]) {
        return ConstraintSet::box(to_vector(node["box"]["lo"], "box.lo"),
                                  to_vector(node["box"]["hi"], "box.hi"));
    }
    if (node["ball"]) {
        return ConstraintSet::ball(to_vector(node["ball"]["center"], "ball.center"),
                                   node["ball"]["radius"].as<double>());
    }
    throw std::invalid_argument("constraint must be 'whole-space', {box: ...} or {ball: ...}");
}

template <typename T>
void read_if(const YAML::Node& node, const char* key, T& out) {
    if (node && node[key]) out = node[key].as<T>();
}

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text) {
    ExperimentConfig cfg;
    cfg.source_text = yaml_text;
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(std::string("config is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) throw std::invalid_argument("config must be a YAML mapping");

    try {
        const YAML::Node g = root["game"];
        if (!g) throw std::invalid_argument("config needs a 'game' section");
        read_if(g, "kind", cfg.game.kind);
        if (cfg.game.kind == "connectivity") {
            if (!g["sources"]) throw std::invalid_argument("connectivity game needs 'sources'");
            for (const auto& s : g["sources"]) {
                const Vector v = to_vector(s, "source");
                if (v.size() != 2) throw std::invalid_argument("sources must be 2-D points");
                cfg.game.sources.emplace_back(v(0), v(1));
            }
            read_if(g, "coupling", cfg.game.coupling);
            cfg.game.dims.assign(cfg.game.sources.size(), 2);
        } else if (cfg.game.kind == "quadratic") {
            if (!g["dims"] || !g["jacobian"] || !g["shift"]) {
                throw std::invalid_argument("quadratic game needs 'dims', 'jacobian' and 'shift'");
            }
            cfg.game.dims = g["dims"].as<std::vector<std::size_t>>();
            cfg.game.jacobian = to_matrix(g["jacobian"], "jacobian");
            cfg.game.shift = to_vector(g["shift"], "shift");
        } else {
            throw std::invalid_argument("unknown game kind '" + cfg.game.kind + "'");
        }
        if (g["constraints"]) {
            const auto& cs = g["constraints"];
            if (!cs.IsSequence() || cs.size() != cfg.game.dims.size()) {
                throw std::invalid_argument("constraints must list one set per agent");
            }
            for (std::size_t i = 0; i < cs.size(); ++i) {
                cfg.game.constraints.push_back(to_constraint(cs[i], cfg.game.dims[i]));
            }
        }

        if (!root["algorithm"]) throw std::invalid_argument("config needs an 'algorithm'");
        cfg.algorithm = parse_algorithm(root["algorithm"].as<std::string>());

        if (const YAML::Node t = root["tuning"]) {
            read_if(t, "alpha", cfg.alpha);
            read_if(t, "beta", cfg.beta);
            read_if(t, "gamma", cfg.gamma);
            cfg.gamma_given = static_cast<bool>(t["gamma"]);
            read_if(t, "lambda", cfg.lambda);
            if (t["amplitudes"]) {
                cfg.amplitudes = t["amplitudes"].IsSequence()
                                     ? t["amplitudes"].as<std::vector<double>>()
                                     : std::vector<double>{t["amplitudes"].as<double>()};
            }
            if (t["frequencies"]) cfg.frequencies = to_vector(t["frequencies"], "frequencies");
            if (t["frequency_seed"]) cfg.frequency_seed = t["frequency_seed"].as<std::uint64_t>();
        }
        if (const YAML::Node s = root["schedule"]) {
            read_if(s, "periods", cfg.periods);
            read_if(s, "tau0", cfg.tau0);
        }
        read_if(root, "horizon", cfg.horizon);
        read_if(root, "log_every", cfg.log_every);
        read_if(root, "output", cfg.output_dir);
        read_if(root, "seed", cfg.seed);
        if (root["x0"]) cfg.x0 = to_vector(root["x0"], "x0");
        if (root["rho"]) cfg.rho = root["rho"].as<double>();
        if (const YAML::Node a = root["avg"]) {
            read_if(a, "n_list", cfg.avg.n_list);
            read_if(a, "eps_list", cfg.avg.eps_list);
        }
    } catch (const YAML::Exception& e) {
        throw std::invalid_argument(std::string("config has a malformed field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

void ExperimentConfig::validate() const {
    const std::size_t n = game.dims.size();
    if (n == 0) throw std::invalid_argument("game has no agents");
    if (game.kind == "connectivity" && !(game.coupling >= 0.0)) {
        throw std::invalid_argument("coupling must be nonnegative");
    }
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string(name) + " must be positive");
        }
    };
    if (algorithm == Algorithm::fb) {
        positive(lambda, "lambda");
        positive(gamma, "gamma");
        if (lambda > 1.0) throw std::invalid_argument("lambda must not exceed 1");
    }
    if (is_async(algorithm) || is_zeroth_order(algorithm)) positive(alpha, "alpha");
    if (is_zeroth_order(algorithm)) {
        positive(beta, "beta");
        if (alpha > 1.0 || beta > 1.0) throw std::invalid_argument("alpha and beta must be <= 1");
        if (algorithm == Algorithm::zo_sync) positive(gamma, "gamma");
        if (amplitudes.size() != 1 && amplitudes.size() != n) {
            throw std::invalid_argument("amplitudes must be one value or one per agent");
        }
        for (double a : amplitudes) {
            if (!(a > 0.0)) {
                throw std::invalid_argument(
                    "dither amplitudes must be positive; a zero amplitude makes the estimator "
                    "divide by zero");
            }
        }
    }
    if (is_async(algorithm)) {
        if (periods.size() != n) throw std::invalid_argument("schedule.periods needs one entry per agent");
        if (tau0.size() != n) throw std::invalid_argument("schedule.tau0 needs one entry per agent");
    }
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    std::size_t m = 0;
    for (auto d : game.dims) m += d;
    if (x0 && static_cast<std::size_t>(x0->size()) != m) {
        throw std::invalid_argument("x0 has the wrong dimension");
    }
    if (frequencies && static_cast<std::size_t>(frequencies->size()) != m) {
        throw std::invalid_argument("frequencies need one entry per scalar coordinate");
    }
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    feed(cfg.source_text);
    feed("|seed=" + std::to_string(cfg.seed));
    feed("|horizon=" + std::to_string(cfg.horizon));
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

GameDefinition build_game(const ExperimentConfig& cfg) {
    if (cfg.game.kind == "connectivity") {
        GameDefinition game = make_connectivity_game(cfg.game.sources, cfg.game.coupling);
        if (!cfg.game.constraints.empty()) return game.with_constraints(cfg.game.constraints);
        return game;
    }
    return make_quadratic_game(cfg.game.dims, cfg.game.jacobian, cfg.game.shift,
                               cfg.game.constraints);
}

TimerSchedule build_schedule(const ExperimentConfig& cfg) {
    return build_schedule(cfg.periods, cfg.tau0);
}

std::vector<double> agent_amplitudes(const ExperimentConfig& cfg, std::size_t agent_count) {
    if (cfg.amplitudes.size() == 1) return std::vector<double>(agent_count, cfg.amplitudes[0]);
    return cfg.amplitudes;
}

FrequencyReport check_frequencies(const ExperimentConfig& cfg, const GameDefinition& game,
                                  const Vector& freqs) {
    if (is_async(cfg.algorithm)) {
        return validate_frequencies_async(freqs, coordinate_epoch_counts(game, build_schedule(cfg)));
    }
    return validate_frequencies_sync(freqs);
}

Vector resolve_frequencies(const ExperimentConfig& cfg, const GameDefinition& game) {
    if (cfg.frequencies) return *cfg.frequencies;
    return generate_frequencies(
        game.dim(), cfg.seed_for_frequencies(),
        [&](const Vector& f) { return check_frequencies(cfg, game, f); });
}

}  // namespace nashseek
