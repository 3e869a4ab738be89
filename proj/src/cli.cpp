#include "nashseek/cli.hpp"

#include "nashseek/averaging.hpp"
#include "nashseek/config.hpp"
#include "nashseek/experiment.hpp"
#include "nashseek/plot.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>

namespace nashseek {

namespace {

struct Options {
    std::string target;  // positional config or log path
    std::string config;  // --config
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> horizon;
    std::string out_dir;
    bool quiet = false;

    std::string config_path() const { return config.empty() ? target : config; }
};

ExperimentConfig load_with_overrides(const Options& opt) {
    const std::string path = opt.config_path();
    if (path.empty()) throw std::invalid_argument("no config given (positional or --config)");
    ExperimentConfig cfg = load_config(path);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.horizon) cfg.horizon = *opt.horizon;
    if (!opt.out_dir.empty()) cfg.output_dir = opt.out_dir;
    cfg.validate();
    return cfg;
}

void print_vector(std::ostream& out, const Vector& v) {
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
    out << "\n";
}

int cmd_run(const Options& opt, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = load_with_overrides(opt);
    const ExperimentResult res = run_experiment(cfg);
    for (const auto& w : res.warnings) err << "warning: " << w << "\n";
    std::filesystem::create_directories(cfg.output_dir);
    const std::string log_path = (std::filesystem::path(cfg.output_dir) / "trajectory.csv").string();
    write_log_csv(res.log, log_path);
    std::vector<std::string> notices;
    const auto plots = emit_plots(res.log, cfg.output_dir, &notices);
    if (!opt.quiet) {
        for (const auto& n : notices) err << "note: " << n << "\n";
        out << "algorithm: " << to_string(cfg.algorithm) << "\n";
        out << "steps: " << cfg.horizon << "\n";
        out << std::setprecision(6) << "final distance to NE: " << res.final_distance << "\n";
        out << "wall time [s]: " << res.wall_seconds << "\n";
        out << "log: " << log_path << "\n";
        for (const auto& p : plots) out << "plot: " << p << "\n";
    }
    return 0;
}

int cmd_ne(const Options& opt, std::ostream& out) {
    const ExperimentConfig cfg = load_with_overrides(opt);
    const GameDefinition game = build_game(cfg);
    const Vector xs = solve_ne_oracle(game);
    print_vector(out, xs);
    if (!opt.quiet) {
        out << std::setprecision(3) << "# ||F(x*)|| = " << pseudogradient(game, xs).norm() << "\n";
    }
    return 0;
}

int cmd_schedule(const Options& opt, std::ostream& out) {
    const ExperimentConfig cfg = load_with_overrides(opt);
    const TimerSchedule s = build_schedule(cfg);
    if (!opt.quiet) {
        out << "# p = " << s.lcm_p << ", r_i =";
        for (auto r : s.jumps_per_epoch) out << " " << r;
        out << ", r = " << s.epoch_length << ", T = " << std::setprecision(17) << s.period << "\n";
    }
    write_schedule_csv(s, out);
    return 0;
}

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
    const ExperimentConfig cfg = load_with_overrides(opt);
    const GameDefinition game = build_game(cfg);
    Vector freqs;
    try {
        freqs = resolve_frequencies(cfg, game);
    } catch (const AssumptionViolation& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    const FrequencyReport rep = check_frequencies(cfg, game, freqs);
    if (!rep.valid()) {
        for (const auto& v : rep.violations) err << "violation: " << v.describe() << "\n";
        return 1;
    }
    out << "frequencies valid (" << (is_async(cfg.algorithm) ? "asynchronous" : "synchronous")
        << " rules): ";
    print_vector(out, freqs);
    return 0;
}

void write_curve(const ResidualCurve& c, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << "N,value\n" << std::setprecision(17);
    for (const auto& p : c.points()) f << p.N << "," << p.value << "\n";
}

int cmd_avg(const Options& opt, std::ostream& out) {
    const ExperimentConfig cfg = load_with_overrides(opt);
    const GameDefinition game = build_game(cfg);
    const Vector x = cfg.x0 ? *cfg.x0 : solve_ne_oracle(game);
    const Vector freqs = resolve_frequencies(cfg, game);
    const OscillatorBank bank =
        OscillatorBank::for_game(game, freqs, agent_amplitudes(cfg, game.agent_count()));
    std::filesystem::create_directories(cfg.output_dir);
    const std::filesystem::path dir(cfg.output_dir);

    const ResidualCurve est = estimator_residual(game, x, bank, cfg.avg.n_list);
    write_curve(est, (dir / "avg_estimator.csv").string());
    out << std::setprecision(6) << "estimator residual:";
    for (const auto& p : est.points()) out << " N=" << p.N << ":" << p.value;
    if (est.size() >= 2) {
        const PowerFit fit = est.fit();
        out << "  fit C=" << fit.C << " exponent=" << fit.exponent << " R2=" << fit.r2;
    }
    out << "\n";

    const Vector F = pseudogradient(game, x);
    const Vector xi0 = Vector::Zero(F.size());
    const ResidualCurve filt = filter_residual(F, xi0, cfg.alpha, cfg.gamma, cfg.avg.n_list);
    write_curve(filt, (dir / "avg_filter.csv").string());
    out << "filter residual:";
    bool ok = true;
    for (const auto& p : filt.points()) {
        const double b = filter_residual_bound(F, xi0, cfg.alpha, cfg.gamma, p.N);
        ok = ok && p.value <= b + 1e-12;
        out << " N=" << p.N << ":" << p.value << "<=" << b;
    }
    out << (ok ? "  (bound holds)" : "  (BOUND VIOLATED)") << "\n";

    // eta study on the two-coordinate dither example, driven by the first two
    // frequencies of this config
    const Eigen::Index m = std::min<Eigen::Index>(2, freqs.size());
    const SystemPair pair =
        dither_example_pair(Vector::Ones(m), Vector::Zero(m), freqs.head(m), 0.5, 0.1);
    Vector mu0(2 * m);
    for (Eigen::Index j = 0; j < m; ++j) {
        mu0(2 * j) = 0.0;
        mu0(2 * j + 1) = 1.0;
    }
    const Vector u0 = Vector::Constant(m, 0.5 / std::sqrt(static_cast<double>(m)));
    const EtaReport eta = eta_rollout(pair, u0, mu0, cfg.avg.eps_list);
    out << "eta sup-norms:";
    for (const auto& r : eta.rows) out << " eps=" << r.eps << ":" << r.sup_norm << "<=" << r.bound;
    out << "  monotone=" << (eta.monotone ? "yes" : "no")
        << " below_bound=" << (eta.below_bound ? "yes" : "no") << "\n";
    return ok && eta.monotone && eta.below_bound ? 0 : 1;
}

int cmd_plot(const Options& opt, std::ostream& out, std::ostream& err) {
    if (opt.target.empty()) throw std::invalid_argument("plot needs a log file");
    const TrajectoryLog log = read_log_csv(opt.target);
    const std::string dir = opt.out_dir.empty()
                                ? std::filesystem::path(opt.target).parent_path().string()
                                : opt.out_dir;
    std::vector<std::string> notices;
    const auto written = emit_plots(log, dir.empty() ? "." : dir, &notices);
    for (const auto& n : notices) err << "note: " << n << "\n";
    if (!opt.quiet) {
        for (const auto& p : written) out << "plot: " << p << "\n";
    }
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nash equilibrium seeking simulator", "nashseek"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* sub, const char* what) {
        sub->add_option("target", opt.target, what);
        sub->add_option("--config", opt.config, "config file (alternative to the positional)");
        sub->add_option("--seed", opt.seed, "override the RNG seed");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--horizon", opt.horizon, "override the number of steps");
        sub->add_flag("--quiet", opt.quiet, "print less");
    };
    auto* run = app.add_subcommand("run", "run an experiment and write its log and plots");
    auto* ne = app.add_subcommand("ne", "print the reference Nash equilibrium");
    auto* sched = app.add_subcommand("schedule", "print the sampling event table of one epoch");
    auto* freqs = app.add_subcommand("validate-freqs", "check dither frequencies for resonances");
    auto* avg = app.add_subcommand("avg", "residual and eta studies for a config");
    auto* plot = app.add_subcommand("plot", "render SVG plots from a trajectory log");
    for (auto* sub : {run, ne, sched, freqs, avg}) add_common(sub, "config file");
    add_common(plot, "trajectory log (CSV)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (run->parsed()) return cmd_run(opt, out, err);
        if (ne->parsed()) return cmd_ne(opt, out);
        if (sched->parsed()) return cmd_schedule(opt, out);
        if (freqs->parsed()) return cmd_validate(opt, out, err);
        if (avg->parsed()) return cmd_avg(opt, out);
        if (plot->parsed()) return cmd_plot(opt, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace nashseek
