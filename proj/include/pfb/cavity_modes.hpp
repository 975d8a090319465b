#pragma once

#include "pfb/model.hpp"

namespace pfb {

// One-sided cavity: perfect mirror at x = 0, partially transparent mirror at
// x = length with complex reflection r and transmission t.
struct MirrorCavity {
    Complex r;
    Complex t;
    double length = 1.0;

    // |r| < 1, |t| > 0, length > 0. Throws DomainError.
    void validate() const;

    // Sharp quasi-modes need |t| well below one; the threshold is a regime
    // flag, not a validity bound.
    bool good_cavity(double threshold = 0.2) const;

    // Spacing of successive quasi-mode peaks, pi/length.
    double free_spectral_range() const { return pi / length; }
};

// Real r with t = i*sqrt(1 - r^2); the convention used throughout the tests.
MirrorCavity lossless_mirror_cavity(double r, double length);

struct ModeAmplitudes {
    Complex inside;     // I(k) = -2it / (1 + r e^{2ikl})
    Complex reflected;  // R(k) = (-r - t + r e^{-2ikl}) / (1 + r e^{2ikl})
};

ModeAmplitudes mode_amplitudes(double k, const MirrorCavity& cavity);

// A fitted quasi-mode: |I(k)| ~ A / |k - k_c + i*kappa/2| near the peak.
struct QuasiMode {
    double k_c = 0.0;          // peak frequency
    double kappa_fit = 0.0;    // fitted full width
    double fit_residual = 0.0; // relative L2 misfit over |k - k_c| <= 3*kappa_fit
};

// Locates the |I(k)| peak nearest k_guess (within half a free spectral range)
// by golden-section refinement, then least-squares fits the Lorentzian width
// over a self-consistent +-3-width window. The amplitude A is eliminated
// analytically, leaving a one-dimensional search in kappa. Throws SearchError
// when no bracketable maximum exists near k_guess.
QuasiMode find_quasimode(const MirrorCavity& cavity, double k_guess);

// Full width of |I(k)| at 1/sqrt(2) of the peak value (half maximum of
// |I|^2), measured by bisection on both sides of k_peak. Independent of the
// fit; used to cross-check kappa_fit.
double half_max_width(const MirrorCavity& cavity, double k_peak);

} // namespace pfb
