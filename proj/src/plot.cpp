#include "nashseek/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace nashseek {

namespace {

constexpr double width = 720.0;
constexpr double height = 540.0;
constexpr double margin = 60.0;

const std::array<const char*, 8> palette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                            "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;

    double sx(double x) const { return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin); }
    double sy(double y) const {
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
    }
};

Frame padded(double x_lo, double x_hi, double y_lo, double y_hi) {
    auto widen = [](double& lo, double& hi) {
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    };
    widen(x_lo, x_hi);
    widen(y_lo, y_hi);
    return {x_lo, x_hi, y_lo, y_hi};
}

void header(std::ostream& out, const std::string& title, const Frame& f, const std::string& xl,
            const std::string& yl) {
    out << std::setprecision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << width - 2 * margin
        << "\" height=\"" << height - 2 * margin << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = f.x_lo + (f.x_hi - f.x_lo) * t / 4.0;
        const double yv = f.y_lo + (f.y_hi - f.y_lo) * t / 4.0;
        out << "<text x=\"" << f.sx(xv) << "\" y=\"" << height - margin + 16
            << "\" text-anchor=\"middle\">" << xv << "</text>\n";
        out << "<text x=\"" << margin - 6 << "\" y=\"" << f.sy(yv) + 4
            << "\" text-anchor=\"end\">" << yv << "</text>\n";
    }
    out << "<text x=\"" << width / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
        << xl << "</text>\n";
    out << "<text x=\"16\" y=\"" << height / 2 << "\" transform=\"rotate(-90 16 " << height / 2
        << ")\" text-anchor=\"middle\">" << yl << "</text>\n";
}

// Keeps SVG size bounded on long runs.
std::size_t row_step(const TrajectoryLog& log) {
    return std::max<std::size_t>(1, log.rows.size() / 4000);
}

void polyline(std::ostream& out, const std::vector<std::pair<double, double>>& pts,
              const char* color, const char* extra = "") {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" " << extra
        << " points=\"";
    for (const auto& [x, y] : pts) out << x << "," << y << " ";
    out << "\"/>\n";
}

}  // namespace

void write_phase_svg(const TrajectoryLog& log, std::ostream& out) {
    for (auto d : log.dims) {
        if (d != 2) throw std::invalid_argument("phase plot needs every agent to be 2-D");
    }
    if (log.rows.size() < 2) throw std::invalid_argument("phase plot needs at least two rows");
    const std::size_t n = log.dims.size();
    const std::size_t step = row_step(log);
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
    auto extend = [&](double x, double y) {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
    };
    for (std::size_t r = 0; r < log.rows.size(); r += step) {
        const Vector x = log.x_at(r);
        for (std::size_t i = 0; i < n; ++i) extend(x(2 * i), x(2 * i + 1));
    }
    for (const auto& s : log.sources) extend(s(0), s(1));
    for (std::size_t i = 0; i < n; ++i) extend(log.x_star(2 * i), log.x_star(2 * i + 1));
    const Frame f = padded(x_lo, x_hi, y_lo, y_hi);

    header(out, "State trajectories", f, "x1", "x2");
    for (std::size_t i = 0; i < n; ++i) {
        const char* color = palette[i % palette.size()];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t r = 0; r < log.rows.size(); r += step) {
            const Vector x = log.x_at(r);
            pts.emplace_back(f.sx(x(2 * i)), f.sy(x(2 * i + 1)));
        }
        const Vector last = log.x_at(log.rows.size() - 1);
        pts.emplace_back(f.sx(last(2 * i)), f.sy(last(2 * i + 1)));
        polyline(out, pts, color);
        if (i < log.sources.size()) {
            out << "<circle cx=\"" << f.sx(log.sources[i](0)) << "\" cy=\""
                << f.sy(log.sources[i](1)) << "\" r=\"6\" fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"2\"/>\n";
        }
        const double cx = f.sx(log.x_star(2 * i));
        const double cy = f.sy(log.x_star(2 * i + 1));
        out << "<path d=\"M" << cx - 6 << "," << cy - 6 << " L" << cx + 6 << "," << cy + 6 << " M"
            << cx - 6 << "," << cy + 6 << " L" << cx + 6 << "," << cy - 6 << "\" stroke=\""
            << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << width - margin - 80 << "\" y=\"" << margin + 18 + 16 * i
            << "\" fill=\"" << color << "\">agent " << i + 1 << "</text>\n";
    }
    out << "</svg>\n";
}

void write_time_svg(const TrajectoryLog& log, std::ostream& out) {
    if (log.rows.empty()) throw std::invalid_argument("time plot needs at least one row");
    const std::size_t m = log.dim();
    const std::size_t tcol = log.column("t");
    const std::size_t step = row_step(log);
    double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
    for (std::size_t r = 0; r < log.rows.size(); r += step) {
        const Vector x = log.x_at(r);
        y_lo = std::min(y_lo, x.minCoeff());
        y_hi = std::max(y_hi, x.maxCoeff());
    }
    y_lo = std::min(y_lo, log.x_star.minCoeff());
    y_hi = std::max(y_hi, log.x_star.maxCoeff());
    const Frame f = padded(log.rows.front()[tcol], log.rows.back()[tcol], y_lo, y_hi);

    header(out, "Time response of the states", f, "t", "x");
    for (std::size_t l = 0; l < m; ++l) {
        const char* color = palette[l % palette.size()];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t r = 0; r < log.rows.size(); r += step) {
            pts.emplace_back(f.sx(log.rows[r][tcol]), f.sy(log.x_at(r)(static_cast<Eigen::Index>(l))));
        }
        pts.emplace_back(f.sx(log.rows.back()[tcol]),
                         f.sy(log.x_at(log.rows.size() - 1)(static_cast<Eigen::Index>(l))));
        polyline(out, pts, color);
        const double ys = f.sy(log.x_star(static_cast<Eigen::Index>(l)));
        out << "<line x1=\"" << margin << "\" y1=\"" << ys << "\" x2=\"" << width - margin
            << "\" y2=\"" << ys << "\" stroke=\"" << color
            << "\" stroke-dasharray=\"6,4\" stroke-width=\"1\"/>\n";
    }
    out << "</svg>\n";
}

std::vector<std::string> emit_plots(const TrajectoryLog& log, const std::string& out_dir,
                                    std::vector<std::string>* notices) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    const bool planar =
        !log.dims.empty() && std::all_of(log.dims.begin(), log.dims.end(), [](auto d) { return d == 2; });
    if (planar && log.rows.size() >= 2) {
        const std::string path = (fs::path(out_dir) / "phase.svg").string();
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        write_phase_svg(log, out);
        written.push_back(path);
    } else if (notices != nullptr) {
        notices->push_back(planar ? "phase plot skipped: fewer than two rows"
                                  : "phase plot skipped: agents are not 2-D");
    }
    const std::string path = (fs::path(out_dir) / "time.svg").string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_time_svg(log, out);
    written.push_back(path);
    return written;
}

}  // namespace nashseek
