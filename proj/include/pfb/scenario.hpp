#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfb/cavity_modes.hpp"
#include "pfb/model.hpp"
#include "pfb/plot_series.hpp"

namespace pfb {

enum class Scenario { fig2, fig3, fig4, fig5, sweep, modes };

Scenario scenario_from_name(const std::string& name);
std::string scenario_name(Scenario scenario);

enum class OutputFormat { csv, json };

// Sample grid for spectral plots, in offsets dk = k - k_c (absolute k offsets
// from k_guess for the modes scenario).
struct GridSpec {
    double min = -8.0;
    double max = 8.0;
    int samples = 2001;
};

struct OutputSpec {
    std::filesystem::path dir = "out";
    OutputFormat format = OutputFormat::csv;
};

struct CavitySpec {
    Complex r{0.99, 0.0};
    std::optional<Complex> t;  // default: lossless-style i*sqrt(1 - r^2) for real r
    double length = 1.0;
    std::optional<double> k_guess;  // default: first quasi-mode pi/(2*length)

    MirrorCavity build() const;
    double resolved_k_guess() const;
};

// One fully described run. Defaults reproduce the library's reference plot
// sets; a JSON config file mirrors this struct and unknown keys are rejected.
struct ScenarioConfig {
    Scenario scenario = Scenario::fig2;
    SystemParams params = SystemParams::optimal(2.5);
    GridSpec grid;
    int rounds = 100;
    std::vector<double> kappa_in_grid;  // default: 41 log-spaced ratios in [1e-3, 10]
    double tolerance = 1e-10;
    OutputSpec output;
    std::optional<CavitySpec> cavity;

    void validate() const;

    // Parses the config object; "scenario" may be omitted when the caller
    // names the scenario out of band. Unknown keys anywhere are a DomainError.
    static ScenarioConfig from_json(const nlohmann::json& doc,
                                    std::optional<Scenario> cli_scenario = {});

    // The fully resolved configuration, defaults included; echoed into every
    // series metadata block so outputs are self-describing.
    nlohmann::json to_json() const;
};

std::vector<double> default_kappa_in_grid();

// Transfer-coefficient spectra |D_L|^2, |D_R|^2 and |C_L|^2, |C_R|^2 over the
// dk grid; one series per coefficient family.
std::vector<PlotSeries> run_fig2(const ScenarioConfig& config);

// Normalized spectral densities |f_c|^2, |f_1|^2, |f_2|^2, |f_10|^2 over the
// dk grid. Normalization is enforced on the full line upstream; metadata
// records the trapezoid sums over the emitted window next to the exact
// windowed masses.
std::vector<PlotSeries> run_fig3(const ScenarioConfig& config);

// Cumulative success probability versus round count for lambda_L/kappa in
// {2.5, 25} at the optimal ratio, next to the constant-p baseline at p = 1/2.
PlotSeries run_fig4(const ScenarioConfig& config);

// Single-trial success probability versus kappa_in/kappa for lambda_L/kappa
// in {0.1, 0.5, 2.5} at the optimal ratio.
PlotSeries run_fig5(const ScenarioConfig& config);

// Feedback trace for the configured parameter set: per-round and cumulative
// probabilities up to the configured round count.
PlotSeries run_sweep(const ScenarioConfig& config);

// |I(k)| and |R(k)| over the grid around k_guess plus the fitted quasi-mode
// report, and a companion series of successive peak positions and spacings.
std::vector<PlotSeries> run_modes(const ScenarioConfig& config);

std::vector<PlotSeries> run_scenario(const ScenarioConfig& config);

// Writes one file per series into output.dir, named <series>.csv or
// <series>.json. Creates the directory if needed; returns the paths written.
std::vector<std::filesystem::path> write_outputs(const std::vector<PlotSeries>& series,
                                                 const OutputSpec& output);

} // namespace pfb
