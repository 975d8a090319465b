#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "pfb/model.hpp"

namespace pfb {

struct QuadratureResult {
    double value = 0.0;           // >= 0, the integrand is a squared modulus
    double error_estimate = 0.0;  // <= requested tolerance on success
    std::size_t evaluations = 0;
};

// Controls for integrate_abs2. The real line is mapped through
// k = center + scale*tan(theta), so tails are integrated exactly; breakpoints
// become initial panel boundaries.
struct QuadratureOptions {
    double tolerance = 1e-10;  // absolute tolerance on the integral
    double center = 0.0;
    double scale = 1.0;
    std::vector<double> breakpoints;  // absolute k values
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    std::size_t max_evaluations = 20'000'000;
};

using SpectralEvaluator = std::function<Complex(double)>;

// Integral of |f(k)|^2 over [lower, upper] (the whole real line by default)
// by adaptive Gauss-Kronrod 7-15 panels in the tangent-mapped variable.
// Deterministic for fixed inputs: panels are summed in position order.
// Throws AccuracyError (carrying the best estimate) if the evaluation budget
// is exhausted before the tolerance is met.
QuadratureResult integrate_abs2(const SpectralEvaluator& f, const QuadratureOptions& options = {});

// Options tuned to a factored spectral function: centered on k_c, scaled by
// the narrowest Lorentzian width, panels seeded at every spectral feature.
QuadratureOptions options_for(const SpectralFunction& f, double tolerance = 1e-10);

QuadratureResult integrate_abs2(const SpectralFunction& f, double tolerance = 1e-10);

// Returns a copy whose squared modulus integrates to one; the norm field
// records the total divisor. Throws DegenerateSpectrumError for a zero-norm
// input (e.g. a right-polarized factor with lambda_L*lambda_R == 0).
SpectralFunction normalize(const SpectralFunction& f, double tolerance = 1e-10);

// Exact closed-form view of a spectral amplitude:
//   s(dk) = prefactor * numerator(dk) / prod_j (dk - pole_j)^{mult_j}
// in the shifted variable dk = k - k_c. |s|^2 is rational with no real poles,
// so its real-line integral is 2*pi*i times the sum of upper-half-plane
// residues of s(z) * conj(s)(conj(z)).
struct RationalSpectrum {
    struct Pole {
        Complex location;
        int multiplicity = 1;
    };

    Complex prefactor = 1.0;
    std::vector<Complex> numerator{1.0};  // ascending coefficients in dk
    std::vector<Pole> poles;

    int total_multiplicity() const;

    // No pole on the real axis; degree(numerator) <= total multiplicity - 1.
    void validate() const;
};

// Highest total pole multiplicity the residue oracle accepts. Above this the
// regular-part Taylor expansion loses too many digits and the oracle abstains.
inline constexpr int residue_multiplicity_guard = 12;

// Expands the factored form into one rational function. Exact bookkeeping;
// fails (DomainError) only if the result is not integrable.
RationalSpectrum to_rational(const SpectralFunction& f);

// Residue-calculus value of the integral of |s(k)|^2 over the real line.
// Independent of the adaptive quadrature path; internal arithmetic runs in
// quad precision so high multiplicities stay accurate. Throws
// OracleUnavailableError beyond the multiplicity guard or for pole pairs too
// close to separate stably.
double integrate_abs2_residues(const RationalSpectrum& s);
double integrate_abs2_residues(const SpectralFunction& f);

} // namespace pfb
