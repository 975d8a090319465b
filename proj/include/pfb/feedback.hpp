#pragma once

#include <vector>

#include "pfb/model.hpp"
#include "pfb/quadrature.hpp"

namespace pfb {

// One feedback round: probability of success at round n, probability of
// having failed every round through n, and the cumulative success probability.
struct RoundRecord {
    int round = 0;              // n >= 1
    double p_right = 0.0;       // right-polarized (success) at round n
    double p_left_cumulative = 0.0;   // left-polarized through all n rounds
    double p_right_cumulative = 0.0;  // success within the first n rounds
};

struct SpectralSnapshot {
    int round = 0;
    std::vector<double> k;
    std::vector<double> density;  // |f_n(k)|^2
};

struct FeedbackTrace {
    SystemParams params;
    std::vector<RoundRecord> rounds;
    std::vector<SpectralSnapshot> snapshots;
    // One coupling is zero: the success channel is closed and iterating
    // cannot terminate; probabilities are still exact.
    bool non_terminating = false;
};

// Which coefficient family applies to a round: round 1 with a cavity photon
// uses the D pair; every re-injection satisfies the scattering condition and
// uses the C pair.
enum class RoundKind { first_round_cavity, scattering_round };

constexpr RoundKind round_kind(int n) {
    return n == 1 ? RoundKind::first_round_cavity : RoundKind::scattering_round;
}

struct FirstRoundProb {
    double p_right = 0.0;
    double p_left = 0.0;
};

// Round 1 uses the cavity-photon D coefficients:
//   p1_R = integral |D_R f_c|^2, p1_L = integral |D_L f_c|^2, summing to one.
FirstRoundProb first_round_prob(const SystemParams& params, double tolerance = 1e-12);

// Normalized spectral function of the photon after n failed rounds:
//   f_n = normalize([C_L]^{n-1} D_L f_c), n >= 1.
SpectralFunction spectral_after_n(const SystemParams& params, int n, double tolerance = 1e-12);

// Probability of failing rounds 1..n-1 and succeeding at round n >= 2:
//   p^R_n = integral |C_R [C_L]^{n-2} D_L f_c|^2.
double round_prob(const SystemParams& params, int n, double tolerance = 1e-12);

// Cumulative success probability over the first N rounds. Evaluates both the
// round sum and the telescoped closed form 1 - integral |[C_L]^{N-1} D_L f_c|^2
// and returns the closed form; disagreement beyond 1e-7 throws
// ConsistencyError (a quadrature failure, not a caller mistake).
double cumulative_prob(const SystemParams& params, int rounds, double tolerance = 1e-12);

// Memoryless reference curve 1 - (1-p)^N.
double constant_p_baseline(double p, int rounds);

// Success probability of a single scattering round for an injected Lorentzian
// photon of width kappa_in: integral |C_R(k) f(k; kappa_in)|^2. Injected
// photons satisfy the scattering condition, so the C (not D) coefficients
// apply; at kappa_in == kappa this differs from the cavity-photon
// first_round_prob, and both are exposed on purpose.
double single_trial_prob(const SystemParams& params, double kappa_in, double tolerance = 1e-12);

struct TraceOptions {
    double tolerance = 1e-12;
    std::vector<int> snapshot_rounds;
    std::vector<double> snapshot_grid;  // absolute k values
};

// Runs the deterministic probability flow for N rounds. No sampling: every
// record is an integral of a closed-form spectral density.
FeedbackTrace run_trace(const SystemParams& params, int rounds, const TraceOptions& options = {});

} // namespace pfb
