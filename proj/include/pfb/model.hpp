#pragma once

#include <complex>
#include <vector>

#include "pfb/errors.hpp"

namespace pfb {

using Complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double sqrt2 = 1.41421356237309504880;

enum class Polarization { left, right };

// Cavity and atom parameters, in units with c = hbar = 1. All spectral
// quantities of the protocol are closed-form functions of these five numbers.
struct SystemParams {
    double kappa = 1.0;     // quasi-mode leakage rate (full Lorentzian width)
    double k_c = 0.0;       // quasi-mode frequency
    double delta_e = 0.0;   // detuning omega_e - k_c
    double lambda_L = 0.0;  // coupling strength of the |L> -> |e> transition
    double lambda_R = 0.0;  // coupling strength of the |R> -> |e> transition

    // kappa > 0, lambdas >= 0, everything finite. Throws DomainError.
    void validate() const;

    // 2*lambda_L^2 + lambda_R^2, the effective coupling entering the poles.
    double coupling_strength_sq() const {
        return 2.0 * lambda_L * lambda_L + lambda_R * lambda_R;
    }

    // Both transitions coupled; otherwise the right-polarized output channel
    // is closed and the feedback protocol can never succeed.
    bool success_channel_open() const { return lambda_L > 0.0 && lambda_R > 0.0; }

    // Characteristic magnitude used by pole-proximity guards.
    double scale() const;

    // Optimal-ratio parameter set lambda_R = sqrt(2)*lambda_L at zero detuning.
    static SystemParams optimal(double lambda_L, double kappa = 1.0, double k_c = 0.0) {
        return SystemParams{kappa, k_c, 0.0, lambda_L, sqrt2 * lambda_L};
    }
};

// The two poles of the atom-cavity response. All transfer coefficients share
// these denominators. Both imaginary parts are <= 0 for valid parameters.
struct RabiPoles {
    Complex omega_plus;
    Complex omega_minus;
};

// omega_pm = (delta_e - i*kappa/2)/2 +- sqrt(((delta_e + i*kappa/2)/2)^2
//            + 2*lambda_L^2 + lambda_R^2), principal square root.
// The "+" label follows the principal branch; downstream formulas only ever
// use the unordered pair. Verifies the Vieta identities and the sign of the
// imaginary parts, throwing DomainError on violation.
RabiPoles rabi_poles(const SystemParams& params);

// Dipole coupling g_mu(k) = sqrt(kappa/2pi) * lambda_mu / (k - k_c + i*kappa/2).
Complex coupling_g(double k, Polarization mu, const SystemParams& params);

// Cavity-photon spectral amplitude f_c(k) = sqrt(kappa/2pi)/(k - k_c + i*kappa/2).
Complex cavity_spectrum(double k, const SystemParams& params);

// Lorentzian input photon of width kappa_in centered on the quasi-mode.
// Reduces to cavity_spectrum at kappa_in == kappa. Throws DomainError for
// kappa_in <= 0.
Complex input_spectrum(double k, double kappa_in, const SystemParams& params);

// Left/right pair of transfer amplitudes at one wavenumber.
struct TransferPair {
    Complex left;
    Complex right;
};

// First-round coefficients for a photon prepared inside the cavity:
//   D_L = [(dk - delta_e)(dk + i*kappa/2) - lambda_R^2] / [(dk - w+)(dk - w-)]
//   D_R = sqrt(2)*lambda_L*lambda_R / [(dk - w+)(dk - w-)]
// with dk = k - k_c. Not pointwise unitary; only the f_c-weighted integrals
// of |D_L|^2 and |D_R|^2 sum to one.
TransferPair transfer_D(double k, const SystemParams& params);
TransferPair transfer_D(double k, const SystemParams& params, const RabiPoles& poles);

// Scattering-round coefficients for a photon injected from outside:
//   C_L = [(dk - delta_e)(dk^2 + kappa^2/4) - dk(lambda_R^2 + 2 lambda_L^2)
//          + i*kappa(lambda_R^2 - 2 lambda_L^2)/2]
//         / [(dk - i*kappa/2)(dk - w+)(dk - w-)]
//   C_R = sqrt(2)*i*kappa*lambda_L*lambda_R / [(dk - i*kappa/2)(dk - w+)(dk - w-)]
// Pointwise unitary: |C_L|^2 + |C_R|^2 = 1 for all real k.
TransferPair transfer_C(double k, const SystemParams& params);
TransferPair transfer_C(double k, const SystemParams& params, const RabiPoles& poles);

// Closed-form factors a spectral function can be built from.
enum class SpectralFactor {
    cavity_lorentzian,  // f_c of width kappa
    input_lorentzian,   // Lorentzian of width kappa_in
    d_left,
    d_right,
    c_left,
    c_right,
};

struct FactorPower {
    SpectralFactor factor;
    int power = 1;
};

// A single-photon spectral amplitude kept in lazy factored form: the product
// of the listed factors divided by a real norm. Evaluation is pure; the norm
// is adjusted by quadrature::normalize so that the squared modulus integrates
// to one over the real line.
class SpectralFunction {
public:
    SpectralFunction(SystemParams params, std::vector<FactorPower> factors,
                     double kappa_in = 0.0);

    Complex operator()(double k) const;

    const SystemParams& params() const { return params_; }
    const RabiPoles& poles() const { return poles_; }
    const std::vector<FactorPower>& factors() const { return factors_; }
    double kappa_in() const { return kappa_in_; }

    double norm() const { return norm_; }
    void set_norm(double norm);

    // Offsets dk = k - k_c where |f|^2 has peaks or kinks; used to seed
    // quadrature panels so narrow features are never straddled.
    std::vector<double> feature_offsets() const;

    // Narrowest Lorentzian width among the factors (kappa or kappa_in).
    double narrowest_width() const;

private:
    SystemParams params_;
    RabiPoles poles_;
    std::vector<FactorPower> factors_;
    double kappa_in_ = 0.0;
    double norm_ = 1.0;
};

SpectralFunction cavity_photon(const SystemParams& params);
SpectralFunction input_photon(const SystemParams& params, double kappa_in);

} // namespace pfb
