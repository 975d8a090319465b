#include "pfb/feedback.hpp"

#include <cmath>
#include <string>

namespace pfb {

namespace {

// Unnormalized spectrum after surviving n rounds: [C_L]^{n-1} D_L f_c.
SpectralFunction left_residual(const SystemParams& params, int n) {
    std::vector<FactorPower> factors{{SpectralFactor::cavity_lorentzian, 1},
                                     {SpectralFactor::d_left, 1}};
    if (n > 1) factors.push_back({SpectralFactor::c_left, n - 1});
    return SpectralFunction(params, std::move(factors));
}

// Integrand of p^R_n for n >= 2: C_R [C_L]^{n-2} D_L f_c.
SpectralFunction round_integrand(const SystemParams& params, int n) {
    std::vector<FactorPower> factors{{SpectralFactor::cavity_lorentzian, 1},
                                     {SpectralFactor::d_left, 1},
                                     {SpectralFactor::c_right, 1}};
    if (n > 2) factors.push_back({SpectralFactor::c_left, n - 2});
    return SpectralFunction(params, std::move(factors));
}

} // namespace

FirstRoundProb first_round_prob(const SystemParams& params, double tolerance) {
    params.validate();
    const double p_right =
        integrate_abs2(SpectralFunction(params, {{SpectralFactor::cavity_lorentzian, 1},
                                                 {SpectralFactor::d_right, 1}}),
                       tolerance)
            .value;
    const double p_left = integrate_abs2(left_residual(params, 1), tolerance).value;
    if (std::abs(p_right + p_left - 1.0) > 1e-8) {
        throw ConsistencyError("first_round_prob: |D_L f_c|^2 and |D_R f_c|^2 do not sum to 1");
    }
    return {p_right, p_left};
}

SpectralFunction spectral_after_n(const SystemParams& params, int n, double tolerance) {
    if (n < 1) throw DomainError("spectral_after_n: n must be >= 1");
    return normalize(left_residual(params, n), tolerance);
}

double round_prob(const SystemParams& params, int n, double tolerance) {
    if (n < 2) throw DomainError("round_prob: defined for n >= 2; round 1 uses first_round_prob");
    params.validate();
    return integrate_abs2(round_integrand(params, n), tolerance).value;
}

double cumulative_prob(const SystemParams& params, int rounds, double tolerance) {
    if (rounds < 1) throw DomainError("cumulative_prob: rounds must be >= 1");
    double sum = first_round_prob(params, tolerance).p_right;
    for (int n = 2; n <= rounds; ++n) sum += round_prob(params, n, tolerance);

    const double survived = integrate_abs2(left_residual(params, rounds), tolerance).value;
    const double closed_form = 1.0 - survived;
    if (std::abs(sum - closed_form) > 1e-7) {
        throw ConsistencyError("cumulative_prob: round sum and telescoped form disagree by " +
                               std::to_string(std::abs(sum - closed_form)));
    }
    return closed_form;
}

double constant_p_baseline(double p, int rounds) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("constant_p_baseline: p must be in [0, 1]");
    if (rounds < 0) throw DomainError("constant_p_baseline: rounds must be >= 0");
    return 1.0 - std::pow(1.0 - p, rounds);
}

double single_trial_prob(const SystemParams& params, double kappa_in, double tolerance) {
    params.validate();
    if (!(kappa_in > 0.0) || !std::isfinite(kappa_in)) {
        throw DomainError("single_trial_prob: kappa_in must be > 0");
    }
    const SpectralFunction integrand(
        params, {{SpectralFactor::input_lorentzian, 1}, {SpectralFactor::c_right, 1}}, kappa_in);
    return integrate_abs2(integrand, tolerance).value;
}

FeedbackTrace run_trace(const SystemParams& params, int rounds, const TraceOptions& options) {
    if (rounds < 1) throw DomainError("run_trace: rounds must be >= 1");
    params.validate();

    FeedbackTrace trace;
    trace.params = params;
    trace.non_terminating = !params.success_channel_open();
    trace.rounds.reserve(rounds);

    double sum = 0.0;
    for (int n = 1; n <= rounds; ++n) {
        RoundRecord record;
        record.round = n;
        record.p_right = (n == 1) ? first_round_prob(params, options.tolerance).p_right
                                  : round_prob(params, n, options.tolerance);
        record.p_left_cumulative =
            integrate_abs2(left_residual(params, n), options.tolerance).value;
        record.p_right_cumulative = 1.0 - record.p_left_cumulative;
        sum += record.p_right;
        if (std::abs(sum - record.p_right_cumulative) > 1e-8) {
            throw ConsistencyError("run_trace: cumulative probability drifted from round sum");
        }
        trace.rounds.push_back(record);

        for (int wanted : options.snapshot_rounds) {
            if (wanted != n) continue;
            const SpectralFunction f_n = spectral_after_n(params, n, options.tolerance);
            SpectralSnapshot snapshot;
            snapshot.round = n;
            snapshot.k = options.snapshot_grid;
            snapshot.density.reserve(snapshot.k.size());
            for (double k : snapshot.k) snapshot.density.push_back(std::norm(f_n(k)));
            trace.snapshots.push_back(std::move(snapshot));
        }
    }
    return trace;
}

} // namespace pfb
