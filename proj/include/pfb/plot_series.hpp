#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace pfb {

// A named table of equal-length numeric columns plus the fully resolved
// configuration that produced it. Everything written to disk round-trips:
// re-reading a file reproduces the in-memory series bit for bit.
struct PlotSeries {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;  // one vector per column
    nlohmann::json metadata;

    std::size_t rows() const { return values.empty() ? 0 : values.front().size(); }

    // Equal column lengths, finite values, names matching columns.
    void validate() const;
};

// Shortest decimal representation that parses back to the same double.
std::string format_shortest(double x);

void write_series_csv(const PlotSeries& series, const std::filesystem::path& file);
void write_series_json(const PlotSeries& series, const std::filesystem::path& file);

PlotSeries read_series_csv(const std::filesystem::path& file);
PlotSeries read_series_json(const std::filesystem::path& file);

} // namespace pfb
