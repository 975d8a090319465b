#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pfb/feedback.hpp"

using namespace pfb;

namespace {

SystemParams optimal(double lambda_L) { return SystemParams::optimal(lambda_L); }

// Values computed independently with the residue oracle (exact rationals on
// the optimal ray: p1_R = S/(2S+kappa^2) with S = 4*lambda_L^2).
constexpr double kP1R_01 = 1.0 / 27.0;
constexpr double kP1R_05 = 1.0 / 3.0;
constexpr double kP1R_25 = 25.0 / 51.0;
constexpr double kP1R_250 = 250000.0 / 500001.0;
constexpr double kPL2_25 = 0.25961734174638712;
constexpr double kPR2_25 = 0.25018657982224031;
constexpr double kPL10_25 = 0.10959241446272637;
constexpr double kEdge01 = 0.99462927644119065;
constexpr double kEdge05 = 0.99941722850589907;
constexpr double kEdge25 = 0.99903019480676861;

} // namespace

TEST_CASE("round kind: cavity photon first, scattering afterwards") {
    static_assert(round_kind(1) == RoundKind::first_round_cavity);
    static_assert(round_kind(2) == RoundKind::scattering_round);
    static_assert(round_kind(100) == RoundKind::scattering_round);
}

TEST_CASE("first round: closed channel gives certain failure") {
    const FirstRoundProb p = first_round_prob({1.0, 0.0, 0.0, 0.0, 0.0});
    CHECK(p.p_right == 0.0);
    CHECK(p.p_left == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("first round: frozen values along the optimal ray") {
    CHECK(first_round_prob(optimal(0.1)).p_right == doctest::Approx(kP1R_01).epsilon(1e-10));
    CHECK(first_round_prob(optimal(0.5)).p_right == doctest::Approx(kP1R_05).epsilon(1e-10));
    CHECK(first_round_prob(optimal(2.5)).p_right == doctest::Approx(kP1R_25).epsilon(1e-10));
}

TEST_CASE("probabilities are invariant under an overall frequency rescale") {
    // (kappa, delta_e, lambdas, k) -> s*(...) leaves every probability fixed
    const double p_base = first_round_prob(SystemParams::optimal(2.5, 1.0)).p_right;
    const double p_scaled = first_round_prob(SystemParams::optimal(12.5, 5.0, 3.0)).p_right;
    CHECK(p_scaled == doctest::Approx(p_base).epsilon(1e-10));
    const double c_base = cumulative_prob(SystemParams::optimal(2.5, 1.0), 3);
    const double c_scaled = cumulative_prob(SystemParams::optimal(0.25, 0.1, -2.0), 3);
    CHECK(c_scaled == doctest::Approx(c_base).epsilon(1e-9));
}

TEST_CASE("first round: strong-coupling approach to one half") {
    const double p25 = first_round_prob(optimal(2.5)).p_right;
    const double p250 = first_round_prob(optimal(25.0)).p_right;
    const double p2500 = first_round_prob(optimal(250.0)).p_right;
    CHECK(p25 < p250);
    CHECK(p250 < p2500);
    CHECK(p2500 < 0.5);
    CHECK(std::abs(p250 - 0.5) < 0.01);
    CHECK(std::abs(p2500 - 0.5) < 0.001);
    CHECK(p2500 == doctest::Approx(kP1R_250).epsilon(1e-10));
}

TEST_CASE("spectral_after_n: decoupled first round keeps the cavity photon") {
    const SystemParams p{1.0, 0.3, 0.0, 0.0, 0.0};
    const SpectralFunction f1 = spectral_after_n(p, 1);
    for (double k : {-1.0, 0.3, 2.0}) {
        CHECK(std::abs(f1(k) - cavity_spectrum(k, p)) < 1e-10);
    }
}

TEST_CASE("spectral_after_n: optimal f_1 peaks at the carrier and the sidebands") {
    const SystemParams p = optimal(2.5);
    const SpectralFunction f1 = spectral_after_n(p, 1);
    CHECK(integrate_abs2(f1, 1e-10).value == doctest::Approx(1.0).epsilon(1e-9));

    const double rabi = rabi_poles(p).omega_plus.real();
    std::vector<double> maxima;
    double prev2 = std::norm(f1(-8.0)), prev1 = std::norm(f1(-8.0 + 0.004));
    for (double k = -8.0 + 0.008; k <= 8.0; k += 0.004) {
        const double cur = std::norm(f1(k));
        if (prev1 > prev2 && prev1 > cur) maxima.push_back(k - 0.004);
        prev2 = prev1;
        prev1 = cur;
    }
    REQUIRE(maxima.size() == 3);
    CHECK(std::abs(maxima[0] + rabi) < 0.15);
    CHECK(std::abs(maxima[1]) < 0.05);
    CHECK(std::abs(maxima[2] - rabi) < 0.15);
}

TEST_CASE("surviving amplitude drains monotonically") {
    const SystemParams p = optimal(2.5);
    const SpectralFunction f2 = spectral_after_n(p, 2);
    const SpectralFunction f10 = spectral_after_n(p, 10);
    // norm fields record sqrt of the unnormalized survival probabilities
    CHECK(f10.norm() < f2.norm());
    CHECK(f2.norm() == doctest::Approx(std::sqrt(kPL2_25)).epsilon(1e-9));
    CHECK(f10.norm() == doctest::Approx(std::sqrt(kPL10_25)).epsilon(1e-9));
}

TEST_CASE("round_prob: closed channel") {
    const SystemParams p{1.0, 0.0, 0.0, 1.0, 0.0};
    CHECK(round_prob(p, 2) == 0.0);
    CHECK(round_prob(p, 5) == 0.0);
}

TEST_CASE("round_prob: preconditions") {
    CHECK_THROWS_AS(round_prob(optimal(2.5), 1), DomainError);
    CHECK_THROWS_AS(spectral_after_n(optimal(2.5), 0), DomainError);
    CHECK_THROWS_AS(cumulative_prob(optimal(2.5), 0), DomainError);
}

TEST_CASE("round_prob: frozen second-round value") {
    CHECK(round_prob(optimal(2.5), 2) == doctest::Approx(kPR2_25).epsilon(1e-10));
}

TEST_CASE("round_prob: factored form equals the direct integral") {
    const SystemParams p = optimal(2.5);
    for (int n = 2; n <= 6; ++n) {
        const SpectralFunction f_prev = spectral_after_n(p, n - 1);
        const double p_left_prev = f_prev.norm() * f_prev.norm();
        QuadratureOptions opt = options_for(f_prev, 1e-11);
        const double scatter =
            integrate_abs2(
                [&](double k) { return transfer_C(k, p, f_prev.poles()).right * f_prev(k); },
                opt)
                .value;
        CHECK(std::abs(p_left_prev * scatter - round_prob(p, n, 1e-11)) < 1e-8);
    }
}

TEST_CASE("cumulative_prob") {
    const SystemParams p = optimal(2.5);
    SUBCASE("one round reduces to the first-round probability") {
        CHECK(cumulative_prob(p, 1) == doctest::Approx(kP1R_25).epsilon(1e-10));
    }
    SUBCASE("frozen values and strict growth") {
        CHECK(cumulative_prob(p, 2) == doctest::Approx(1.0 - kPL2_25).epsilon(1e-9));
        CHECK(cumulative_prob(p, 10) == doctest::Approx(1.0 - kPL10_25).epsilon(1e-9));
        double prev = 0.0;
        for (int n = 1; n <= 6; ++n) {
            const double cur = cumulative_prob(p, n);
            CHECK(cur > prev);
            prev = cur;
        }
    }
    SUBCASE("closed channel never succeeds") {
        const SystemParams closed{1.0, 0.0, 0.0, 0.0, 0.0};
        CHECK(cumulative_prob(closed, 1) == doctest::Approx(0.0));
        CHECK(cumulative_prob(closed, 3) == doctest::Approx(0.0));
    }
}

TEST_CASE("telescoping identity at small round counts") {
    const SystemParams p = optimal(2.5);
    double sum = first_round_prob(p, 1e-11).p_right;
    for (int n = 2; n <= 10; ++n) {
        sum += round_prob(p, n, 1e-11);
        if (n == 2 || n == 5 || n == 10) {
            std::vector<FactorPower> factors{{SpectralFactor::cavity_lorentzian, 1},
                                             {SpectralFactor::d_left, 1},
                                             {SpectralFactor::c_left, n - 1}};
            const double survived =
                integrate_abs2(SpectralFunction(p, std::move(factors)), 1e-11).value;
            CHECK(std::abs(sum + survived - 1.0) < 1e-7);
        }
    }
}

TEST_CASE("constant-p baseline") {
    CHECK(constant_p_baseline(0.5, 1) == doctest::Approx(0.5));
    CHECK(constant_p_baseline(0.5, 10) == doctest::Approx(0.9990234375).epsilon(1e-15));
    CHECK(constant_p_baseline(0.37, 0) == 0.0);
    CHECK_THROWS_AS(constant_p_baseline(-0.1, 3), DomainError);
    CHECK_THROWS_AS(constant_p_baseline(1.1, 3), DomainError);
    CHECK_THROWS_AS(constant_p_baseline(0.5, -1), DomainError);
}

TEST_CASE("memoryless baseline dominates the true cumulative probability") {
    const SystemParams p = optimal(2.5);
    for (int n = 2; n <= 12; ++n) {
        CHECK(constant_p_baseline(0.5, n) > cumulative_prob(p, n));
    }
}

TEST_CASE("single trial: frozen narrow-input values") {
    CHECK(single_trial_prob(optimal(0.1), 1e-3) == doctest::Approx(kEdge01).epsilon(1e-9));
    CHECK(single_trial_prob(optimal(0.5), 1e-3) == doctest::Approx(kEdge05).epsilon(1e-9));
    CHECK(single_trial_prob(optimal(2.5), 1e-3) == doctest::Approx(kEdge25).epsilon(1e-9));
}

TEST_CASE("single trial: closed channel and bad width") {
    CHECK(single_trial_prob({1.0, 0.0, 0.0, 1.0, 0.0}, 0.5) == 0.0);
    CHECK_THROWS_AS(single_trial_prob(optimal(2.5), 0.0), DomainError);
    CHECK_THROWS_AS(single_trial_prob(optimal(2.5), -1.0), DomainError);
}

TEST_CASE("single trial uses scattering coefficients, not the cavity-photon ones") {
    // at kappa_in == kappa the two conventions differ: the C-based single
    // trial gives 2/3 at lambda_L = 0.5 while the D-based first round gives 1/3
    const SystemParams p = optimal(0.5);
    CHECK(single_trial_prob(p, p.kappa) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(first_round_prob(p).p_right == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("trace invariants") {
    const FeedbackTrace trace = run_trace(optimal(2.5), 12);
    CHECK(!trace.non_terminating);
    REQUIRE(trace.rounds.size() == 12);
    double sum = 0.0, prev_cum = 0.0, prev_left = 1.0;
    for (const RoundRecord& r : trace.rounds) {
        CHECK(r.p_right >= 0.0);
        CHECK(r.p_right <= 1.0);
        CHECK(r.p_right_cumulative >= prev_cum);
        CHECK(r.p_right_cumulative <= 1.0);
        CHECK(r.p_left_cumulative <= prev_left + 1e-12);
        sum += r.p_right;
        CHECK(std::abs(sum - r.p_right_cumulative) < 1e-8);
        prev_cum = r.p_right_cumulative;
        prev_left = r.p_left_cumulative;
    }
}

TEST_CASE("trace flags a closed success channel as non-terminating") {
    SUBCASE("one coupling zero") {
        const FeedbackTrace trace = run_trace({1.0, 0.0, 0.0, 1.0, 0.0}, 4);
        CHECK(trace.non_terminating);
        for (const RoundRecord& r : trace.rounds) {
            CHECK(r.p_right == 0.0);
            CHECK(r.p_right_cumulative == doctest::Approx(0.0));
        }
    }
    SUBCASE("both couplings zero") {
        const FeedbackTrace trace = run_trace({1.0, 0.0, 0.0, 0.0, 0.0}, 3);
        CHECK(trace.non_terminating);
        CHECK(trace.rounds.back().p_left_cumulative == doctest::Approx(1.0));
    }
}

TEST_CASE("trace snapshots sample the normalized densities") {
    TraceOptions options;
    options.snapshot_rounds = {1, 2};
    options.snapshot_grid = {-1.0, 0.0, 1.0};
    const SystemParams p = optimal(2.5);
    const FeedbackTrace trace = run_trace(p, 2, options);
    REQUIRE(trace.snapshots.size() == 2);
    CHECK(trace.snapshots[0].round == 1);
    CHECK(trace.snapshots[1].round == 2);
    const SpectralFunction f1 = spectral_after_n(p, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(trace.snapshots[0].density[i] ==
              doctest::Approx(std::norm(f1(options.snapshot_grid[i]))).epsilon(1e-12));
    }
}
