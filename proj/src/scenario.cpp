#include "pfb/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <future>
#include <mutex>
#include <thread>

#include "pfb/feedback.hpp"
#include "pfb/quadrature.hpp"

namespace pfb {

namespace {

// Runs body(0..count-1) on a small pool; output slots are disjoint, so the
// result does not depend on scheduling. The first exception wins.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& thread : pool) thread.join();
    if (error) std::rethrow_exception(error);
}

std::vector<double> grid_points(const GridSpec& grid, double anchor) {
    std::vector<double> points(grid.samples);
    for (int i = 0; i < grid.samples; ++i) {
        points[i] = anchor + grid.min + (grid.max - grid.min) * i / (grid.samples - 1.0);
    }
    return points;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        sum += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    }
    return sum;
}

nlohmann::json complex_to_json(const Complex& z) {
    if (z.imag() == 0.0) return z.real();
    return nlohmann::json::array({z.real(), z.imag()});
}

Complex complex_from_json(const nlohmann::json& value, const std::string& key) {
    if (value.is_number()) return Complex(value.get<double>(), 0.0);
    if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number()) {
        return Complex(value[0].get<double>(), value[1].get<double>());
    }
    throw DomainError("config: " + key + " must be a number or [re, im]");
}

void reject_unknown_keys(const nlohmann::json& object, const std::vector<std::string>& known,
                         const std::string& where) {
    if (!object.is_object()) {
        throw DomainError("config: " + where + " must be a JSON object");
    }
    for (const auto& item : object.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw DomainError("config: unknown key '" + item.key() + "' in " + where);
        }
    }
}

double number_at(const nlohmann::json& object, const std::string& key, double fallback) {
    if (!object.contains(key)) return fallback;
    if (!object.at(key).is_number()) throw DomainError("config: " + key + " must be a number");
    return object.at(key).get<double>();
}

constexpr double kFig4LambdaRatios[] = {2.5, 25.0};
constexpr double kFig5LambdaRatios[] = {0.1, 0.5, 2.5};

std::string ratio_label(double ratio) {
    std::string text = format_shortest(ratio);
    return text + "kappa";
}

} // namespace

Scenario scenario_from_name(const std::string& name) {
    if (name == "fig2") return Scenario::fig2;
    if (name == "fig3") return Scenario::fig3;
    if (name == "fig4") return Scenario::fig4;
    if (name == "fig5") return Scenario::fig5;
    if (name == "sweep") return Scenario::sweep;
    if (name == "modes") return Scenario::modes;
    throw DomainError("config: unknown scenario '" + name + "'");
}

std::string scenario_name(Scenario scenario) {
    switch (scenario) {
    case Scenario::fig2: return "fig2";
    case Scenario::fig3: return "fig3";
    case Scenario::fig4: return "fig4";
    case Scenario::fig5: return "fig5";
    case Scenario::sweep: return "sweep";
    case Scenario::modes: return "modes";
    }
    throw DomainError("config: invalid scenario value");
}

MirrorCavity CavitySpec::build() const {
    Complex transmission;
    if (t) {
        transmission = *t;
    } else {
        if (r.imag() != 0.0) {
            throw DomainError("config: cavity.t required when r is not real");
        }
        transmission = Complex(0.0, std::sqrt(1.0 - r.real() * r.real()));
    }
    MirrorCavity cavity{r, transmission, length};
    cavity.validate();
    return cavity;
}

double CavitySpec::resolved_k_guess() const {
    return k_guess ? *k_guess : 0.5 * pi / length;
}

std::vector<double> default_kappa_in_grid() {
    std::vector<double> grid(41);
    for (int i = 0; i < 41; ++i) grid[i] = std::pow(10.0, -3.0 + 4.0 * i / 40.0);
    return grid;
}

void ScenarioConfig::validate() const {
    params.validate();
    if (grid.samples < 2) throw DomainError("config: grid.samples must be >= 2");
    if (grid.samples > 10'000'000) throw DomainError("config: grid.samples is unreasonably large");
    if (!(grid.min < grid.max)) throw DomainError("config: grid requires k_min < k_max");
    if (rounds < 1) throw DomainError("config: rounds must be >= 1");
    if (!(tolerance > 0.0)) throw DomainError("config: tolerance must be > 0");
    for (double ratio : kappa_in_grid) {
        if (!(ratio > 0.0)) throw DomainError("config: kappa_in_grid entries must be > 0");
    }
    if (scenario == Scenario::fig5 && kappa_in_grid.empty()) {
        throw DomainError("config: fig5 requires a non-empty kappa_in_grid");
    }
    if (scenario == Scenario::modes) {
        if (!cavity) throw DomainError("config: modes requires a cavity block");
        cavity->build();
    }
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& document,
                                         std::optional<Scenario> cli_scenario) {
    const nlohmann::json doc =
        document.is_null() ? nlohmann::json::object() : document;
    if (!doc.is_object()) throw DomainError("config: top level must be a JSON object");
    reject_unknown_keys(doc,
                        {"scenario", "params", "grid", "rounds", "kappa_in_grid", "tolerance",
                         "output", "cavity"},
                        "config");

    ScenarioConfig config;
    if (doc.contains("scenario")) {
        if (!doc.at("scenario").is_string()) {
            throw DomainError("config: scenario must be a string");
        }
        config.scenario = scenario_from_name(doc.at("scenario").get<std::string>());
        if (cli_scenario && *cli_scenario != config.scenario) {
            throw DomainError("config: scenario in file disagrees with the one requested");
        }
    } else if (cli_scenario) {
        config.scenario = *cli_scenario;
    } else {
        throw DomainError("config: scenario missing");
    }

    if (doc.contains("params")) {
        const auto& params = doc.at("params");
        reject_unknown_keys(params, {"kappa", "k_c", "delta_e", "lambda_L", "lambda_R"},
                            "params");
        config.params.kappa = number_at(params, "kappa", config.params.kappa);
        config.params.k_c = number_at(params, "k_c", config.params.k_c);
        config.params.delta_e = number_at(params, "delta_e", config.params.delta_e);
        config.params.lambda_L = number_at(params, "lambda_L", config.params.lambda_L);
        config.params.lambda_R = number_at(params, "lambda_R", config.params.lambda_R);
    }

    bool grid_given = doc.contains("grid");
    if (grid_given) {
        const auto& grid = doc.at("grid");
        reject_unknown_keys(grid, {"k_min", "k_max", "samples"}, "grid");
        config.grid.min = number_at(grid, "k_min", config.grid.min);
        config.grid.max = number_at(grid, "k_max", config.grid.max);
        if (grid.contains("samples")) {
            if (!grid.at("samples").is_number_integer()) {
                throw DomainError("config: grid.samples must be an integer");
            }
            config.grid.samples = grid.at("samples").get<int>();
        }
    }

    if (doc.contains("rounds")) {
        if (!doc.at("rounds").is_number_integer()) {
            throw DomainError("config: rounds must be an integer");
        }
        config.rounds = doc.at("rounds").get<int>();
    }

    if (doc.contains("kappa_in_grid")) {
        if (!doc.at("kappa_in_grid").is_array()) {
            throw DomainError("config: kappa_in_grid must be an array of numbers");
        }
        for (const auto& value : doc.at("kappa_in_grid")) {
            if (!value.is_number()) {
                throw DomainError("config: kappa_in_grid must be an array of numbers");
            }
            config.kappa_in_grid.push_back(value.get<double>());
        }
    }

    config.tolerance = number_at(doc, "tolerance", config.tolerance);

    if (doc.contains("output")) {
        const auto& output = doc.at("output");
        reject_unknown_keys(output, {"dir", "format"}, "output");
        if (output.contains("dir")) {
            if (!output.at("dir").is_string()) throw DomainError("config: output.dir must be a string");
            config.output.dir = output.at("dir").get<std::string>();
        }
        if (output.contains("format")) {
            const std::string format = output.at("format").get<std::string>();
            if (format == "csv") {
                config.output.format = OutputFormat::csv;
            } else if (format == "json") {
                config.output.format = OutputFormat::json;
            } else {
                throw DomainError("config: output.format must be csv or json");
            }
        }
    }

    if (doc.contains("cavity")) {
        const auto& cavity = doc.at("cavity");
        reject_unknown_keys(cavity, {"r", "t", "l", "k_guess"}, "cavity");
        CavitySpec spec;
        if (cavity.contains("r")) spec.r = complex_from_json(cavity.at("r"), "cavity.r");
        if (cavity.contains("t")) spec.t = complex_from_json(cavity.at("t"), "cavity.t");
        spec.length = number_at(cavity, "l", spec.length);
        if (cavity.contains("k_guess")) spec.k_guess = number_at(cavity, "k_guess", 0.0);
        config.cavity = spec;
    }

    // Scenario-dependent defaults for anything not given explicitly.
    if (config.scenario == Scenario::fig5 && config.kappa_in_grid.empty()) {
        config.kappa_in_grid = default_kappa_in_grid();
    }
    if (config.scenario == Scenario::modes) {
        if (!config.cavity) config.cavity = CavitySpec{};
        if (!grid_given) {
            // one and a half free spectral ranges each side keeps the
            // neighboring peaks interior to the window
            const double fsr = pi / config.cavity->length;
            config.grid.min = -1.5 * fsr;
            config.grid.max = 1.5 * fsr;
        }
    }

    config.validate();
    return config;
}

nlohmann::json ScenarioConfig::to_json() const {
    nlohmann::json doc{
        {"scenario", scenario_name(scenario)},
        {"params",
         {{"kappa", params.kappa},
          {"k_c", params.k_c},
          {"delta_e", params.delta_e},
          {"lambda_L", params.lambda_L},
          {"lambda_R", params.lambda_R}}},
        {"tolerance", tolerance},
        {"output",
         {{"dir", output.dir.string()},
          {"format", output.format == OutputFormat::csv ? "csv" : "json"}}},
    };
    if (scenario == Scenario::fig2 || scenario == Scenario::fig3 || scenario == Scenario::modes) {
        doc["grid"] = {{"k_min", grid.min}, {"k_max", grid.max}, {"samples", grid.samples}};
    }
    if (scenario == Scenario::fig4 || scenario == Scenario::sweep) doc["rounds"] = rounds;
    if (scenario == Scenario::fig5) doc["kappa_in_grid"] = kappa_in_grid;
    if (scenario == Scenario::modes && cavity) {
        doc["cavity"] = {{"r", complex_to_json(cavity->r)},
                         {"t", complex_to_json(cavity->build().t)},
                         {"l", cavity->length},
                         {"k_guess", cavity->resolved_k_guess()}};
    }
    return doc;
}

std::vector<PlotSeries> run_fig2(const ScenarioConfig& config) {
    config.validate();
    const SystemParams& p = config.params;
    const RabiPoles poles = rabi_poles(p);
    const std::vector<double> ks = grid_points(config.grid, p.k_c);
    const std::size_t n = ks.size();

    std::vector<double> dk(n), dl2(n), dr2(n), cl2(n), cr2(n);
    parallel_for(n, [&](std::size_t i) {
        dk[i] = ks[i] - p.k_c;
        const TransferPair d = transfer_D(ks[i], p, poles);
        const TransferPair c = transfer_C(ks[i], p, poles);
        dl2[i] = std::norm(d.left);
        dr2[i] = std::norm(d.right);
        cl2[i] = std::norm(c.left);
        cr2[i] = std::norm(c.right);
    });

    const nlohmann::json metadata{{"config", config.to_json()}};
    PlotSeries first{"fig2_D", {"dk", "abs2_D_L", "abs2_D_R"}, {dk, dl2, dr2}, metadata};
    PlotSeries second{"fig2_C", {"dk", "abs2_C_L", "abs2_C_R"}, {dk, cl2, cr2}, metadata};
    first.validate();
    second.validate();
    return {first, second};
}

std::vector<PlotSeries> run_fig3(const ScenarioConfig& config) {
    config.validate();
    const SystemParams& p = config.params;
    const std::vector<double> ks = grid_points(config.grid, p.k_c);
    const std::size_t n = ks.size();

    const int snapshot_rounds[] = {1, 2, 10};
    std::vector<SpectralFunction> densities{cavity_photon(p)};
    for (int round : snapshot_rounds) {
        densities.push_back(spectral_after_n(p, round, config.tolerance));
    }

    std::vector<std::vector<double>> columns(1 + densities.size(),
                                             std::vector<double>(n, 0.0));
    parallel_for(n, [&](std::size_t i) {
        columns[0][i] = ks[i] - p.k_c;
        for (std::size_t d = 0; d < densities.size(); ++d) {
            columns[d + 1][i] = std::norm(densities[d](ks[i]));
        }
    });

    // The emitted window holds only part of the unit norm; record the
    // trapezoid sums next to the exact windowed masses so the grid can be
    // checked for sampling error without conflating it with tail mass.
    nlohmann::json trapezoids = nlohmann::json::array();
    nlohmann::json window_masses = nlohmann::json::array();
    for (std::size_t d = 0; d < densities.size(); ++d) {
        trapezoids.push_back(trapezoid(ks, columns[d + 1]));
        QuadratureOptions opt = options_for(densities[d], config.tolerance);
        opt.lower = ks.front();
        opt.upper = ks.back();
        const auto& f = densities[d];
        window_masses.push_back(integrate_abs2([&f](double k) { return f(k); }, opt).value);
    }

    nlohmann::json metadata{{"config", config.to_json()},
                            {"trapezoid_window_integrals", trapezoids},
                            {"exact_window_masses", window_masses}};
    PlotSeries series{"fig3_spectra",
                      {"dk", "abs2_f_c", "abs2_f_1", "abs2_f_2", "abs2_f_10"},
                      std::move(columns),
                      std::move(metadata)};
    series.validate();
    return {series};
}

PlotSeries run_fig4(const ScenarioConfig& config) {
    config.validate();
    const double kappa = config.params.kappa;
    const double k_c = config.params.k_c;
    const int rounds = config.rounds;

    std::vector<std::future<FeedbackTrace>> futures;
    for (double ratio : kFig4LambdaRatios) {
        const SystemParams params = SystemParams::optimal(ratio * kappa, kappa, k_c);
        futures.push_back(std::async(std::launch::async, [params, rounds, &config] {
            return run_trace(params, rounds, {config.tolerance, {}, {}});
        }));
    }

    std::vector<double> n_column(rounds), baseline(rounds);
    for (int n = 1; n <= rounds; ++n) {
        n_column[n - 1] = n;
        baseline[n - 1] = constant_p_baseline(0.5, n);
    }

    PlotSeries series;
    series.name = "fig4_cumulative";
    series.columns = {"N"};
    series.values = {n_column};
    for (std::size_t i = 0; i < futures.size(); ++i) {
        const FeedbackTrace trace = futures[i].get();
        std::vector<double> column(rounds);
        for (int n = 0; n < rounds; ++n) column[n] = trace.rounds[n].p_right_cumulative;
        series.columns.push_back("P_R_lambda_" + ratio_label(kFig4LambdaRatios[i]));
        series.values.push_back(std::move(column));
    }
    series.columns.push_back("baseline_p_0.5");
    series.values.push_back(baseline);
    series.metadata = {{"config", config.to_json()},
                       {"lambda_L_over_kappa", {kFig4LambdaRatios[0], kFig4LambdaRatios[1]}},
                       {"lambda_ratio", "lambda_R = sqrt(2)*lambda_L"}};
    series.validate();
    return series;
}

PlotSeries run_fig5(const ScenarioConfig& config) {
    config.validate();
    const double kappa = config.params.kappa;
    const double k_c = config.params.k_c;
    const std::vector<double>& ratios = config.kappa_in_grid;
    const std::size_t n_ratios = ratios.size();
    constexpr std::size_t n_lambda = std::size(kFig5LambdaRatios);

    std::vector<std::vector<double>> curves(n_lambda, std::vector<double>(n_ratios, 0.0));
    parallel_for(n_lambda * n_ratios, [&](std::size_t index) {
        const std::size_t l = index / n_ratios;
        const std::size_t r = index % n_ratios;
        const SystemParams params =
            SystemParams::optimal(kFig5LambdaRatios[l] * kappa, kappa, k_c);
        curves[l][r] = single_trial_prob(params, ratios[r] * kappa, config.tolerance);
    });

    nlohmann::json monotone = nlohmann::json::array();
    for (const auto& curve : curves) {
        bool nonincreasing = true;
        for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
            nonincreasing &= curve[i + 1] <= curve[i] + 1e-12;
        }
        monotone.push_back(nonincreasing);
    }

    PlotSeries series;
    series.name = "fig5_single_trial";
    series.columns = {"kappa_in_over_kappa"};
    series.values = {ratios};
    for (std::size_t l = 0; l < n_lambda; ++l) {
        series.columns.push_back("P_R1_lambda_" + ratio_label(kFig5LambdaRatios[l]));
        series.values.push_back(std::move(curves[l]));
    }
    series.metadata = {{"config", config.to_json()},
                       {"lambda_L_over_kappa",
                        {kFig5LambdaRatios[0], kFig5LambdaRatios[1], kFig5LambdaRatios[2]}},
                       {"monotone_nonincreasing", monotone}};
    series.validate();
    return series;
}

PlotSeries run_sweep(const ScenarioConfig& config) {
    config.validate();
    const FeedbackTrace trace = run_trace(config.params, config.rounds, {config.tolerance, {}, {}});

    const std::size_t n = trace.rounds.size();
    std::vector<double> round(n), p_r(n), p_l_cum(n), p_r_cum(n);
    for (std::size_t i = 0; i < n; ++i) {
        round[i] = trace.rounds[i].round;
        p_r[i] = trace.rounds[i].p_right;
        p_l_cum[i] = trace.rounds[i].p_left_cumulative;
        p_r_cum[i] = trace.rounds[i].p_right_cumulative;
    }
    PlotSeries series{"sweep_trace",
                      {"n", "p_R", "p_L_cumulative", "P_R_cumulative"},
                      {round, p_r, p_l_cum, p_r_cum},
                      {{"config", config.to_json()},
                       {"non_terminating", trace.non_terminating}}};
    series.validate();
    return series;
}

std::vector<PlotSeries> run_modes(const ScenarioConfig& config) {
    config.validate();
    const MirrorCavity cavity = config.cavity->build();
    const double k_guess = config.cavity->resolved_k_guess();
    const QuasiMode mode = find_quasimode(cavity, k_guess);
    const double width = half_max_width(cavity, mode.k_c);

    const std::vector<double> ks = grid_points(config.grid, k_guess);
    const std::size_t n = ks.size();
    std::vector<double> abs_i(n), abs_r(n);
    parallel_for(n, [&](std::size_t i) {
        const ModeAmplitudes amplitudes = mode_amplitudes(ks[i], cavity);
        abs_i[i] = std::abs(amplitudes.inside);
        abs_r[i] = std::abs(amplitudes.reflected);
    });

    nlohmann::json metadata{{"config", config.to_json()},
                            {"quasimode",
                             {{"k_c", mode.k_c},
                              {"kappa_fit", mode.kappa_fit},
                              {"fit_residual", mode.fit_residual}}},
                            {"half_max_width", width},
                            {"good_cavity", cavity.good_cavity()},
                            {"free_spectral_range", cavity.free_spectral_range()}};

    PlotSeries amplitudes{"modes_amplitudes", {"k", "abs_I", "abs_R"}, {ks, abs_i, abs_r},
                          metadata};
    amplitudes.validate();

    // Refine every interior grid maximum of |I| and report successive
    // peak-to-peak spacings.
    std::vector<double> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (abs_i[i] > abs_i[i - 1] && abs_i[i] > abs_i[i + 1]) {
            const QuasiMode refined = find_quasimode(cavity, ks[i]);
            if (peaks.empty() ||
                refined.k_c - peaks.back() > 0.25 * cavity.free_spectral_range()) {
                peaks.push_back(refined.k_c);
            }
        }
    }
    std::vector<double> lower, upper, spacing;
    for (std::size_t i = 0; i + 1 < peaks.size(); ++i) {
        lower.push_back(peaks[i]);
        upper.push_back(peaks[i + 1]);
        spacing.push_back(peaks[i + 1] - peaks[i]);
    }
    PlotSeries peak_series{"modes_peaks",
                           {"k_peak_lower", "k_peak_upper", "spacing"},
                           {lower, upper, spacing},
                           metadata};
    peak_series.validate();
    return {amplitudes, peak_series};
}

std::vector<PlotSeries> run_scenario(const ScenarioConfig& config) {
    switch (config.scenario) {
    case Scenario::fig2: return run_fig2(config);
    case Scenario::fig3: return run_fig3(config);
    case Scenario::fig4: return {run_fig4(config)};
    case Scenario::fig5: return {run_fig5(config)};
    case Scenario::sweep: return {run_sweep(config)};
    case Scenario::modes: return run_modes(config);
    }
    throw DomainError("run_scenario: invalid scenario value");
}

std::vector<std::filesystem::path> write_outputs(const std::vector<PlotSeries>& series,
                                                 const OutputSpec& output) {
    std::filesystem::create_directories(output.dir);
    std::vector<std::filesystem::path> written;
    for (const PlotSeries& one : series) {
        const char* extension = output.format == OutputFormat::csv ? ".csv" : ".json";
        const std::filesystem::path file = output.dir / (one.name + extension);
        if (output.format == OutputFormat::csv) {
            write_series_csv(one, file);
        } else {
            write_series_json(one, file);
        }
        written.push_back(file);
    }
    return written;
}

} // namespace pfb
