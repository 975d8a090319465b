#include "pfb/plot_series.hpp"

#include <charconv>
#include <cstring>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "pfb/errors.hpp"

namespace pfb {

namespace {

constexpr const char* kCsvMarker = "# photonfb-series ";

void fail_io(const std::filesystem::path& file, const std::string& what) {
    throw Error("series i/o: " + what + ": " + file.string());
}

double parse_double(std::string_view text) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error("series i/o: malformed number '" + std::string(text) + "'");
    }
    return out;
}

} // namespace

void PlotSeries::validate() const {
    if (columns.size() != values.size()) {
        throw DomainError("PlotSeries: column name count differs from column count");
    }
    const std::size_t n = rows();
    for (std::size_t c = 0; c < values.size(); ++c) {
        if (values[c].size() != n) throw DomainError("PlotSeries: ragged columns");
        for (double v : values[c]) {
            if (!std::isfinite(v)) {
                throw DomainError("PlotSeries: non-finite value in column " + columns[c]);
            }
        }
    }
}

std::string format_shortest(double x) {
    char buffer[32];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
    if (ec != std::errc()) throw Error("format_shortest: to_chars failed");
    return std::string(buffer, ptr);
}

void write_series_csv(const PlotSeries& series, const std::filesystem::path& file) {
    series.validate();
    std::ostringstream out;
    nlohmann::json head{{"name", series.name}, {"metadata", series.metadata}};
    out << kCsvMarker << head.dump() << '\n';
    for (std::size_t c = 0; c < series.columns.size(); ++c) {
        out << (c ? "," : "") << series.columns[c];
    }
    out << '\n';
    for (std::size_t row = 0; row < series.rows(); ++row) {
        for (std::size_t c = 0; c < series.values.size(); ++c) {
            out << (c ? "," : "") << format_shortest(series.values[c][row]);
        }
        out << '\n';
    }
    std::ofstream stream(file, std::ios::binary | std::ios::trunc);
    if (!stream) fail_io(file, "cannot open for writing");
    stream << out.str();
    if (!stream) fail_io(file, "write failed");
}

void write_series_json(const PlotSeries& series, const std::filesystem::path& file) {
    series.validate();
    nlohmann::json doc{{"name", series.name},
                       {"metadata", series.metadata},
                       {"columns", series.columns},
                       {"values", series.values}};
    std::ofstream stream(file, std::ios::binary | std::ios::trunc);
    if (!stream) fail_io(file, "cannot open for writing");
    stream << doc.dump(2) << '\n';
    if (!stream) fail_io(file, "write failed");
}

PlotSeries read_series_csv(const std::filesystem::path& file) {
    std::ifstream stream(file, std::ios::binary);
    if (!stream) fail_io(file, "cannot open for reading");

    PlotSeries series;
    std::string line;
    if (!std::getline(stream, line) || line.rfind(kCsvMarker, 0) != 0) {
        fail_io(file, "missing series header comment");
    }
    const nlohmann::json head = nlohmann::json::parse(line.substr(std::strlen(kCsvMarker)));
    series.name = head.at("name").get<std::string>();
    series.metadata = head.at("metadata");

    if (!std::getline(stream, line)) fail_io(file, "missing column header");
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) series.columns.push_back(cell);
    series.values.assign(series.columns.size(), {});

    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        std::size_t column = 0, start = 0;
        while (column < series.columns.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            series.values[column].push_back(
                parse_double(std::string_view(line).substr(start, end - start)));
            start = end + 1;
            ++column;
        }
    }
    series.validate();
    return series;
}

PlotSeries read_series_json(const std::filesystem::path& file) {
    std::ifstream stream(file, std::ios::binary);
    if (!stream) fail_io(file, "cannot open for reading");
    const nlohmann::json doc = nlohmann::json::parse(stream);
    PlotSeries series;
    series.name = doc.at("name").get<std::string>();
    series.metadata = doc.at("metadata");
    series.columns = doc.at("columns").get<std::vector<std::string>>();
    series.values = doc.at("values").get<std::vector<std::vector<double>>>();
    series.validate();
    return series;
}

} // namespace pfb
