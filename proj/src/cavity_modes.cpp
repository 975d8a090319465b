#include "pfb/cavity_modes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace pfb {

namespace {

constexpr double golden_ratio = 0.61803398874989484820;

// Golden-section maximum of f on [a, b]; f is assumed unimodal there.
double golden_max(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    double x1 = b - golden_ratio * (b - a);
    double x2 = a + golden_ratio * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > rel_tol * std::max({std::abs(a), std::abs(b), 1.0})) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden_ratio * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden_ratio * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

double abs_inside(const MirrorCavity& cavity, double k) {
    return std::abs(mode_amplitudes(k, cavity).inside);
}

// Solve |I(k)| = target on [a, b] by bisection, assuming a sign change of
// |I| - target across the interval.
double bisect_level(const MirrorCavity& cavity, double target, double a, double b) {
    double fa = abs_inside(cavity, a) - target;
    double fb = abs_inside(cavity, b) - target;
    if (fa * fb > 0.0) {
        throw SearchError("half_max_width: level crossing not bracketed");
    }
    for (int i = 0; i < 200 && (b - a) > 1e-15 * std::max(std::abs(a), std::abs(b)); ++i) {
        const double mid = 0.5 * (a + b);
        const double fm = abs_inside(cavity, mid) - target;
        if (fa * fm <= 0.0) {
            b = mid;
            fb = fm;
        } else {
            a = mid;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

} // namespace

void MirrorCavity::validate() const {
    if (!std::isfinite(r.real()) || !std::isfinite(r.imag()) || !std::isfinite(t.real()) ||
        !std::isfinite(t.imag()) || !std::isfinite(length)) {
        throw DomainError("MirrorCavity: all fields must be finite");
    }
    if (std::abs(r) >= 1.0) throw DomainError("MirrorCavity: |r| must be < 1");
    if (!(std::abs(t) > 0.0)) throw DomainError("MirrorCavity: |t| must be > 0");
    if (!(length > 0.0)) throw DomainError("MirrorCavity: length must be > 0");
}

bool MirrorCavity::good_cavity(double threshold) const { return std::abs(t) < threshold; }

MirrorCavity lossless_mirror_cavity(double r, double length) {
    MirrorCavity cavity{Complex(r, 0.0), Complex(0.0, std::sqrt(1.0 - r * r)), length};
    cavity.validate();
    return cavity;
}

ModeAmplitudes mode_amplitudes(double k, const MirrorCavity& cavity) {
    cavity.validate();
    const Complex phase = std::exp(Complex(0.0, 2.0 * k * cavity.length));
    const Complex den = 1.0 + cavity.r * phase;
    return {Complex(0.0, -2.0) * cavity.t / den,
            (-cavity.r - cavity.t + cavity.r / phase) / den};
}

QuasiMode find_quasimode(const MirrorCavity& cavity, double k_guess) {
    cavity.validate();
    const double half_fsr = 0.5 * cavity.free_spectral_range();

    // Coarse bracket within half a free spectral range of the guess.
    constexpr int grid_points = 257;
    std::vector<double> magnitudes(grid_points);
    const double lo = k_guess - half_fsr;
    const double step = 2.0 * half_fsr / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) magnitudes[i] = abs_inside(cavity, lo + i * step);
    const auto it = std::max_element(magnitudes.begin(), magnitudes.end());
    const int peak = static_cast<int>(it - magnitudes.begin());
    if (peak == 0 || peak == grid_points - 1 || !(magnitudes[peak] > magnitudes[peak - 1]) ||
        !(magnitudes[peak] > magnitudes[peak + 1])) {
        throw SearchError("find_quasimode: no bracketable |I(k)| maximum near k_guess");
    }

    auto target = [&cavity](double k) { return abs_inside(cavity, k); };
    const double k_c =
        golden_max(target, lo + (peak - 1) * step, lo + (peak + 1) * step, 1e-12);

    // Least-squares width: for fixed kappa the best amplitude is linear, so
    // only kappa needs a search. The +-3-width window depends on the answer;
    // a few passes make it self-consistent.
    const double width0 = half_max_width(cavity, k_c);
    constexpr int samples = 241;
    double kappa_fit = width0;
    double residual = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        std::vector<double> ks(samples), ys(samples);
        const double window = 3.0 * kappa_fit;
        for (int i = 0; i < samples; ++i) {
            ks[i] = k_c - window + 2.0 * window * i / (samples - 1);
            ys[i] = abs_inside(cavity, ks[i]);
        }
        auto misfit = [&](double kappa) {
            double sy = 0.0, ss = 0.0;
            std::vector<double> shape(samples);
            for (int i = 0; i < samples; ++i) {
                shape[i] = 1.0 / std::abs(Complex(ks[i] - k_c, 0.5 * kappa));
                sy += ys[i] * shape[i];
                ss += shape[i] * shape[i];
            }
            const double amplitude = sy / ss;
            double sse = 0.0;
            for (int i = 0; i < samples; ++i) {
                const double d = ys[i] - amplitude * shape[i];
                sse += d * d;
            }
            return sse;
        };
        kappa_fit = golden_max([&](double kappa) { return -misfit(kappa); }, width0 / 8.0,
                               8.0 * width0, 1e-13);
        double y2 = 0.0;
        for (double y : ys) y2 += y * y;
        residual = std::sqrt(misfit(kappa_fit) / y2);
    }
    return {k_c, kappa_fit, residual};
}

double half_max_width(const MirrorCavity& cavity, double k_peak) {
    cavity.validate();
    const double half_fsr = 0.5 * cavity.free_spectral_range();
    const double target = abs_inside(cavity, k_peak) / sqrt2;
    const double upper = bisect_level(cavity, target, k_peak, k_peak + half_fsr);
    const double lower = bisect_level(cavity, target, k_peak - half_fsr, k_peak);
    return upper - lower;
}

} // namespace pfb
