#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfb/errors.hpp"
#include "pfb/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"photonfb: spectral simulation of the single-photon feedback "
                 "entanglement protocol in a leaky cavity"};
    app.footer("Scenarios: fig2 (transfer spectra), fig3 (photon spectra per round),\n"
               "fig4 (cumulative success vs rounds), fig5 (single trial vs input width),\n"
               "sweep (feedback trace for the configured parameters), modes (exact\n"
               "cavity modes and quasi-mode fit).");

    std::string scenario_arg;
    app.add_option("scenario", scenario_arg, "Scenario to run")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "sweep", "modes"}));
    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration file")
        ->check(CLI::ExistingFile);
    std::string out_dir;
    app.add_option("--out", out_dir, "Output directory (overrides config)");
    std::string format;
    app.add_option("--format", format, "Output format (overrides config)")
        ->check(CLI::IsMember({"csv", "json"}));
    double tolerance = 0.0;
    auto* tolerance_option =
        app.add_option("--tolerance", tolerance, "Quadrature tolerance (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    pfb::ScenarioConfig config;
    try {
        nlohmann::json doc = nlohmann::json::object();
        if (!config_path.empty()) {
            std::ifstream stream(config_path);
            if (!stream) {
                std::cerr << "error: cannot open config file " << config_path << '\n';
                return kExitConfigError;
            }
            doc = nlohmann::json::parse(stream);
        }
        config = pfb::ScenarioConfig::from_json(doc, pfb::scenario_from_name(scenario_arg));
        if (!out_dir.empty()) config.output.dir = out_dir;
        if (!format.empty()) {
            config.output.format =
                format == "csv" ? pfb::OutputFormat::csv : pfb::OutputFormat::json;
        }
        if (tolerance_option->count() > 0) config.tolerance = tolerance;
        config.validate();
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: invalid config JSON: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const pfb::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }

    try {
        const auto series = pfb::run_scenario(config);
        const auto files = pfb::write_outputs(series, config.output);
        for (const auto& file : files) std::cout << file.string() << '\n';
    } catch (const pfb::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const pfb::Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumericalError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumericalError;
    }
    return kExitOk;
}
