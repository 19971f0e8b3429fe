#pragma once

#include "ghbmp/estimator.hpp"
#include "ghbmp/simulator.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghbmp::io {

/// Raised for unreadable or unwritable files and malformed CSV input.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest round-trip rendering with 17 significant digits.
[[nodiscard]] std::string format_real(double value);

/// `t,x` rows for every grid point.
void write_path_csv(const std::filesystem::path& file, const PathSample& path);

/// Sidecar next to a path CSV: same basename, `.meta` extension.
void write_path_meta(const std::filesystem::path& csv_file, const PathSample& path);
[[nodiscard]] std::filesystem::path meta_path_for(const std::filesystem::path& csv_file);

struct LoadedPath {
    std::vector<double> times;
    std::vector<double> values;
    unsigned n = 0;
};

/// Reads a `t,x` CSV and checks that it covers the grid i / 2^n.
[[nodiscard]] LoadedPath read_path_csv(const std::filesystem::path& file);

/// `interval_index,t_mid,h_true,h_raw,h_smooth`; an empty optional leaves
/// the h_true field blank.
void write_estimate_csv(const std::filesystem::path& file, const EstimateSeries& series,
                        const std::optional<std::vector<double>>& h_true);

struct Series {
    std::string label;
    std::string colour;
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Minimal 800x500 SVG line chart with axes and a legend.
void write_line_plot(const std::filesystem::path& file, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series);

}  // namespace ghbmp::io
