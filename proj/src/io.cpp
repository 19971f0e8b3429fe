#include "ghbmp/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace ghbmp::io {

namespace {

std::ofstream open_for_write(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + file.string() + "' for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
    out.flush();
    if (!out) {
        throw IoError("failed while writing '" + file.string() + "'");
    }
}

double parse_real(const std::string& token, const std::filesystem::path& file, std::size_t line) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) {
        ++begin;
    }
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) {
        --end;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw IoError(file.string() + ":" + std::to_string(line) + ": '" + token + "' is not a number");
    }
    return value;
}

std::string escape_xml(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string format_real(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    return std::string(buffer, ptr);
}

void write_path_csv(const std::filesystem::path& file, const PathSample& path) {
    auto out = open_for_write(file);
    out << "t,x\n";
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        out << format_real(path.times[i]) << ',' << format_real(path.values[i]) << '\n';
    }
    finish(out, file);
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv_file) {
    auto meta = csv_file;
    meta.replace_extension(".meta");
    return meta;
}

void write_path_meta(const std::filesystem::path& csv_file, const PathSample& path) {
    const auto file = meta_path_for(csv_file);
    auto out = open_for_write(file);
    out << "family = " << path.family << '\n'
        << "J = " << path.config.J << '\n'
        << "n = " << path.config.n << '\n'
        << "seed = " << path.config.seed << '\n'
        << "tail_tol = " << format_real(path.config.tail_tol) << '\n'
        << "dropped_variance_bound = " << format_real(path.dropped_variance_bound) << '\n'
        << "config_hash = " << std::hex << path.config_hash() << std::dec << '\n';
    finish(out, file);
}

LoadedPath read_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open '" + file.string() + "'");
    }
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) {
        throw IoError(file.string() + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "t,x") {
        throw IoError(file.string() + ": expected header 't,x', got '" + line + "'");
    }
    LoadedPath path;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw IoError(file.string() + ":" + std::to_string(line_no) + ": expected two fields");
        }
        path.times.push_back(parse_real(line.substr(0, comma), file, line_no));
        path.values.push_back(parse_real(line.substr(comma + 1), file, line_no));
    }
    const std::size_t cells = path.times.empty() ? 0 : path.times.size() - 1;
    if (cells < 2 || (cells & (cells - 1)) != 0) {
        throw IoError(file.string() + ": path must have 2^n + 1 rows, got " + std::to_string(path.times.size()));
    }
    path.n = static_cast<unsigned>(std::countr_zero(cells));
    for (std::size_t i = 0; i <= cells; ++i) {
        const double expected = std::ldexp(static_cast<double>(i), -static_cast<int>(path.n));
        if (path.times[i] != expected) {
            throw IoError(file.string() + ": row " + std::to_string(i + 2) + " has t = " + format_real(path.times[i]) +
                          ", expected " + format_real(expected));
        }
    }
    return path;
}

void write_estimate_csv(const std::filesystem::path& file, const EstimateSeries& series,
                        const std::optional<std::vector<double>>& h_true) {
    auto out = open_for_write(file);
    out << "interval_index,t_mid,h_true,h_raw,h_smooth\n";
    for (std::size_t p = 0; p < series.h_raw.size(); ++p) {
        out << p << ',' << format_real(series.interval_mids[p]) << ',';
        if (h_true) {
            out << format_real((*h_true)[p]);
        }
        out << ',' << format_real(series.h_raw[p]) << ',' << format_real(series.h_smooth[p]) << '\n';
    }
    finish(out, file);
}

void write_line_plot(const std::filesystem::path& file, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series) {
    constexpr double kWidth = 800.0;
    constexpr double kHeight = 500.0;
    constexpr double kLeft = 70.0;
    constexpr double kRight = 20.0;
    constexpr double kTop = 40.0;
    constexpr double kBottom = 60.0;

    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double y_min = x_min;
    double y_max = -x_min;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            x_min = std::min(x_min, s.xs[i]);
            x_max = std::max(x_max, s.xs[i]);
            y_min = std::min(y_min, s.ys[i]);
            y_max = std::max(y_max, s.ys[i]);
        }
    }
    if (!std::isfinite(x_min)) {
        x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    }
    if (x_max == x_min) {
        x_max = x_min + 1.0;
    }
    if (y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

    auto out = open_for_write(file);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n"
        << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n"
        << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << escape_xml(title) << "</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 5; ++tick) {
        const double fx = x_min + (x_max - x_min) * tick / 5.0;
        const double fy = y_min + (y_max - y_min) * tick / 5.0;
        std::ostringstream xl;
        std::ostringstream yl;
        xl.precision(3);
        yl.precision(3);
        xl << fx;
        yl << fy;
        out << "<text x=\"" << px(fx) << "\" y=\"" << kTop + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xl.str() << "</text>\n"
            << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << yl.str() << "</text>\n";
    }
    out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape_xml(x_label)
        << "</text>\n"
        << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 18 " << kTop + plot_h / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape_xml(y_label)
        << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& line = series[s];
        out << "<polyline fill=\"none\" stroke=\"" << line.colour << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < line.xs.size(); ++i) {
            out << (i == 0 ? "" : " ") << px(line.xs[i]) << ',' << py(line.ys[i]);
        }
        out << "\"/>\n";
        const double ly = kTop + 12 + 16.0 * static_cast<double>(s);
        out << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w - 125
            << "\" y2=\"" << ly << "\" stroke=\"" << line.colour << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << kLeft + plot_w - 120 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(line.label) << "</text>\n";
    }
    out << "</svg>\n";
    finish(out, file);
}

}  // namespace ghbmp::io
