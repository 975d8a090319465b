#include "pfb/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace pfb {

namespace {

bool all_finite(const SystemParams& p) {
    return std::isfinite(p.kappa) && std::isfinite(p.k_c) && std::isfinite(p.delta_e) &&
           std::isfinite(p.lambda_L) && std::isfinite(p.lambda_R);
}

Complex int_pow(Complex base, int exponent) {
    Complex result = 1.0;
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

// Evaluation closer to a pole than this is treated as a degenerate input.
double proximity_threshold(const SystemParams& p) { return 1e-14 * p.scale(); }

void guard_pole(const Complex& dk, const Complex& pole, const SystemParams& p) {
    if (std::abs(dk - pole) < proximity_threshold(p)) {
        throw PoleProximityError("transfer coefficient evaluated within 1e-14*scale of a pole");
    }
}

} // namespace

void SystemParams::validate() const {
    if (!all_finite(*this)) throw DomainError("SystemParams: all fields must be finite");
    if (!(kappa > 0.0)) throw DomainError("SystemParams: kappa must be > 0");
    if (lambda_L < 0.0 || lambda_R < 0.0) {
        throw DomainError("SystemParams: coupling strengths must be >= 0");
    }
}

double SystemParams::scale() const {
    return std::max({kappa, lambda_L, lambda_R, 1.0});
}

RabiPoles rabi_poles(const SystemParams& params) {
    params.validate();
    const Complex half_sum = 0.5 * Complex(params.delta_e, -0.5 * params.kappa);
    const Complex q = 0.5 * Complex(params.delta_e, 0.5 * params.kappa);
    const Complex root = std::sqrt(q * q + params.coupling_strength_sq());
    const RabiPoles poles{half_sum + root, half_sum - root};

    if (!std::isfinite(poles.omega_plus.real()) || !std::isfinite(poles.omega_plus.imag()) ||
        !std::isfinite(poles.omega_minus.real()) || !std::isfinite(poles.omega_minus.imag())) {
        throw DomainError("rabi_poles: non-finite result, parameters out of range");
    }

    const double tol = 1e-12 * params.scale();
    if (poles.omega_plus.imag() > tol || poles.omega_minus.imag() > tol) {
        throw DomainError("rabi_poles: pole crossed into the upper half plane");
    }

    // Vieta identities; violations indicate a broken square-root evaluation.
    // Residuals are relative to the pole magnitude, the scale the floating
    // point cancellation actually happens at.
    const Complex sum = poles.omega_plus + poles.omega_minus;
    const Complex sum_expected(params.delta_e, -0.5 * params.kappa);
    const Complex prod = poles.omega_plus * poles.omega_minus;
    const Complex prod_expected =
        Complex(0.0, -0.5 * params.delta_e * params.kappa) - params.coupling_strength_sq();
    const double pole_mag = std::abs(poles.omega_plus) + std::abs(poles.omega_minus);
    if (std::abs(sum - sum_expected) > 1e-12 * std::max(pole_mag, 1.0) ||
        std::abs(prod - prod_expected) >
            1e-12 * std::max({pole_mag * pole_mag, std::abs(prod_expected), 1.0})) {
        throw DomainError("rabi_poles: Vieta residual exceeds tolerance");
    }
    return poles;
}

Complex coupling_g(double k, Polarization mu, const SystemParams& params) {
    const double lambda = (mu == Polarization::left) ? params.lambda_L : params.lambda_R;
    return lambda * cavity_spectrum(k, params);
}

Complex cavity_spectrum(double k, const SystemParams& params) {
    return std::sqrt(params.kappa / two_pi) /
           Complex(k - params.k_c, 0.5 * params.kappa);
}

Complex input_spectrum(double k, double kappa_in, const SystemParams& params) {
    if (!(kappa_in > 0.0) || !std::isfinite(kappa_in)) {
        throw DomainError("input_spectrum: kappa_in must be > 0");
    }
    return std::sqrt(kappa_in / two_pi) / Complex(k - params.k_c, 0.5 * kappa_in);
}

TransferPair transfer_D(double k, const SystemParams& params) {
    return transfer_D(k, params, rabi_poles(params));
}

TransferPair transfer_D(double k, const SystemParams& params, const RabiPoles& poles) {
    if (params.coupling_strength_sq() == 0.0) return {1.0, 0.0};

    const Complex dk(k - params.k_c, 0.0);
    guard_pole(dk, poles.omega_plus, params);
    guard_pole(dk, poles.omega_minus, params);

    const Complex den = (dk - poles.omega_plus) * (dk - poles.omega_minus);
    const Complex num_left = (dk - params.delta_e) * (dk + Complex(0.0, 0.5 * params.kappa)) -
                             params.lambda_R * params.lambda_R;
    const double num_right = sqrt2 * params.lambda_L * params.lambda_R;
    return {num_left / den, num_right / den};
}

TransferPair transfer_C(double k, const SystemParams& params) {
    return transfer_C(k, params, rabi_poles(params));
}

TransferPair transfer_C(double k, const SystemParams& params, const RabiPoles& poles) {
    if (params.coupling_strength_sq() == 0.0) return {1.0, 0.0};

    const double kappa = params.kappa;
    const Complex dk(k - params.k_c, 0.0);
    const Complex cavity_pole(0.0, 0.5 * kappa);
    guard_pole(dk, poles.omega_plus, params);
    guard_pole(dk, poles.omega_minus, params);
    guard_pole(dk, cavity_pole, params);

    const double lL2 = params.lambda_L * params.lambda_L;
    const double lR2 = params.lambda_R * params.lambda_R;
    const Complex den =
        (dk - cavity_pole) * (dk - poles.omega_plus) * (dk - poles.omega_minus);
    const Complex num_left = (dk - params.delta_e) * (dk * dk + 0.25 * kappa * kappa) -
                             dk * (lR2 + 2.0 * lL2) +
                             Complex(0.0, 0.5 * kappa * (lR2 - 2.0 * lL2));
    const Complex num_right(0.0, sqrt2 * kappa * params.lambda_L * params.lambda_R);
    return {num_left / den, num_right / den};
}

SpectralFunction::SpectralFunction(SystemParams params, std::vector<FactorPower> factors,
                                   double kappa_in)
    : params_(params), poles_(rabi_poles(params)), factors_(std::move(factors)),
      kappa_in_(kappa_in) {
    for (const auto& fp : factors_) {
        if (fp.power < 1) throw DomainError("SpectralFunction: factor powers must be >= 1");
        if (fp.factor == SpectralFactor::input_lorentzian &&
            (!(kappa_in_ > 0.0) || !std::isfinite(kappa_in_))) {
            throw DomainError("SpectralFunction: input factor requires kappa_in > 0");
        }
    }
}

Complex SpectralFunction::operator()(double k) const {
    Complex value = 1.0;
    TransferPair d{}, c{};
    bool have_d = false, have_c = false;
    for (const auto& [factor, power] : factors_) {
        Complex base;
        switch (factor) {
        case SpectralFactor::cavity_lorentzian:
            base = cavity_spectrum(k, params_);
            break;
        case SpectralFactor::input_lorentzian:
            base = input_spectrum(k, kappa_in_, params_);
            break;
        case SpectralFactor::d_left:
        case SpectralFactor::d_right:
            if (!have_d) {
                d = transfer_D(k, params_, poles_);
                have_d = true;
            }
            base = (factor == SpectralFactor::d_left) ? d.left : d.right;
            break;
        case SpectralFactor::c_left:
        case SpectralFactor::c_right:
            if (!have_c) {
                c = transfer_C(k, params_, poles_);
                have_c = true;
            }
            base = (factor == SpectralFactor::c_left) ? c.left : c.right;
            break;
        }
        value *= int_pow(base, power);
    }
    return value / norm_;
}

void SpectralFunction::set_norm(double norm) {
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DomainError("SpectralFunction: norm must be a positive finite real");
    }
    norm_ = norm;
}

std::vector<double> SpectralFunction::feature_offsets() const {
    std::vector<double> offsets{0.0, -0.5 * params_.kappa, 0.5 * params_.kappa};
    bool transfer = false, input = false;
    for (const auto& fp : factors_) {
        transfer |= fp.factor != SpectralFactor::cavity_lorentzian &&
                    fp.factor != SpectralFactor::input_lorentzian;
        input |= fp.factor == SpectralFactor::input_lorentzian;
    }
    if (transfer) {
        offsets.push_back(poles_.omega_plus.real());
        offsets.push_back(-poles_.omega_plus.real());
        offsets.push_back(poles_.omega_minus.real());
        offsets.push_back(-poles_.omega_minus.real());
    }
    if (input) {
        offsets.push_back(-0.5 * kappa_in_);
        offsets.push_back(0.5 * kappa_in_);
    }
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    return offsets;
}

double SpectralFunction::narrowest_width() const {
    double width = params_.kappa;
    for (const auto& fp : factors_) {
        if (fp.factor == SpectralFactor::input_lorentzian) width = std::min(width, kappa_in_);
    }
    return width;
}

SpectralFunction cavity_photon(const SystemParams& params) {
    return SpectralFunction(params, {{SpectralFactor::cavity_lorentzian, 1}});
}

SpectralFunction input_photon(const SystemParams& params, double kappa_in) {
    return SpectralFunction(params, {{SpectralFactor::input_lorentzian, 1}}, kappa_in);
}

} // namespace pfb
