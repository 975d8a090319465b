#include "pfb/quadrature.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace pfb {

namespace {

// The regular-part Taylor expansion cancels many digits at high multiplicity,
// so the oracle runs its arithmetic in quad precision end to end.
using qfloat = __float128;

struct QComplex {
    qfloat re = 0.0;
    qfloat im = 0.0;
};

QComplex operator+(QComplex a, QComplex b) { return {a.re + b.re, a.im + b.im}; }
QComplex operator-(QComplex a, QComplex b) { return {a.re - b.re, a.im - b.im}; }
QComplex operator*(QComplex a, QComplex b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
QComplex operator*(qfloat s, QComplex a) { return {s * a.re, s * a.im}; }

// Smith's algorithm; plain textbook division overflows sooner.
QComplex operator/(QComplex a, QComplex b) {
    if (fabsq(b.re) >= fabsq(b.im)) {
        const qfloat t = b.im / b.re;
        const qfloat d = b.re + b.im * t;
        return {(a.re + a.im * t) / d, (a.im - a.re * t) / d};
    }
    const qfloat t = b.re / b.im;
    const qfloat d = b.re * t + b.im;
    return {(a.re * t + a.im) / d, (a.im * t - a.re) / d};
}

QComplex conj(QComplex a) { return {a.re, -a.im}; }
qfloat abs2(QComplex a) { return a.re * a.re + a.im * a.im; }
qfloat qabs(QComplex a) { return sqrtq(abs2(a)); }

QComplex from(const Complex& z) { return {z.real(), z.imag()}; }

QComplex pow_int(QComplex base, int exponent) {
    QComplex result{1.0, 0.0};
    while (exponent > 0) {
        if (exponent & 1) result = result * base;
        base = base * base;
        exponent >>= 1;
    }
    return result;
}

qfloat binomial(int n, int r) {
    qfloat value = 1.0;
    for (int i = 1; i <= r; ++i) value = value * qfloat(n - r + i) / qfloat(i);
    return value;
}

std::vector<QComplex> convolve(const std::vector<QComplex>& a, const std::vector<QComplex>& b) {
    std::vector<QComplex> out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] = out[i + j] + a[i] * b[j];
    }
    return out;
}

struct MergedPole {
    QComplex location;
    int multiplicity;
};

std::vector<Complex> convolve_d(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    std::vector<Complex> out(a.size() + b.size() - 1, Complex(0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

void add_pole(std::vector<RationalSpectrum::Pole>& poles, const Complex& location, int count) {
    for (auto& pole : poles) {
        if (pole.location == location) {
            pole.multiplicity += count;
            return;
        }
    }
    poles.push_back({location, count});
}

bool numerator_is_zero(const std::vector<Complex>& numerator) {
    return std::all_of(numerator.begin(), numerator.end(),
                       [](const Complex& c) { return c == Complex(0.0); });
}

} // namespace

int RationalSpectrum::total_multiplicity() const {
    int total = 0;
    for (const auto& pole : poles) total += pole.multiplicity;
    return total;
}

void RationalSpectrum::validate() const {
    for (const auto& pole : poles) {
        if (pole.multiplicity < 1) {
            throw DomainError("RationalSpectrum: pole multiplicities must be >= 1");
        }
        if (pole.location.imag() == 0.0) {
            throw DomainError("RationalSpectrum: pole on the real axis");
        }
    }
    int degree = -1;
    for (std::size_t i = 0; i < numerator.size(); ++i) {
        if (numerator[i] != Complex(0.0)) degree = static_cast<int>(i);
    }
    if (degree >= 0 && prefactor != Complex(0.0) && degree > total_multiplicity() - 1) {
        throw DomainError("RationalSpectrum: |s|^2 does not decay; integral diverges");
    }
}

RationalSpectrum to_rational(const SpectralFunction& f) {
    const SystemParams& p = f.params();
    const RabiPoles& rabi = f.poles();
    const double lL2 = p.lambda_L * p.lambda_L;
    const double lR2 = p.lambda_R * p.lambda_R;
    const bool no_coupling = p.coupling_strength_sq() == 0.0;
    const Complex lower_pole(0.0, -0.5 * p.kappa);
    const Complex upper_pole(0.0, 0.5 * p.kappa);

    RationalSpectrum out;
    out.prefactor = 1.0 / f.norm();

    auto append = [&out](Complex pref, const std::vector<Complex>& num,
                         const std::vector<Complex>& poles, int power) {
        for (int i = 0; i < power; ++i) {
            out.prefactor *= pref;
            out.numerator = convolve_d(out.numerator, num);
            for (const Complex& q : poles) add_pole(out.poles, q, 1);
        }
    };

    for (const auto& [factor, power] : f.factors()) {
        switch (factor) {
        case SpectralFactor::cavity_lorentzian:
            append(std::sqrt(p.kappa / two_pi), {1.0}, {lower_pole}, power);
            break;
        case SpectralFactor::input_lorentzian:
            append(std::sqrt(f.kappa_in() / two_pi), {1.0},
                   {Complex(0.0, -0.5 * f.kappa_in())}, power);
            break;
        case SpectralFactor::d_left:
            if (no_coupling) break;  // exact cancellation: D_L == 1
            append(1.0,
                   {Complex(-lR2, -0.5 * p.delta_e * p.kappa), Complex(-p.delta_e, 0.5 * p.kappa),
                    1.0},
                   {rabi.omega_plus, rabi.omega_minus}, power);
            break;
        case SpectralFactor::d_right:
            append(1.0, {sqrt2 * p.lambda_L * p.lambda_R},
                   no_coupling ? std::vector<Complex>{}
                               : std::vector<Complex>{rabi.omega_plus, rabi.omega_minus},
                   power);
            break;
        case SpectralFactor::c_left:
            if (no_coupling) break;  // exact cancellation: C_L == 1
            append(1.0,
                   {Complex(-0.25 * p.delta_e * p.kappa * p.kappa,
                            0.5 * p.kappa * (lR2 - 2.0 * lL2)),
                    Complex(0.25 * p.kappa * p.kappa - lR2 - 2.0 * lL2, 0.0),
                    Complex(-p.delta_e, 0.0), 1.0},
                   {upper_pole, rabi.omega_plus, rabi.omega_minus}, power);
            break;
        case SpectralFactor::c_right:
            append(1.0, {Complex(0.0, sqrt2 * p.kappa * p.lambda_L * p.lambda_R)},
                   no_coupling ? std::vector<Complex>{}
                               : std::vector<Complex>{upper_pole, rabi.omega_plus,
                                                      rabi.omega_minus},
                   power);
            break;
        }
    }

    if (numerator_is_zero(out.numerator)) {
        // A right-polarized factor with a closed channel kills the whole
        // product; collapse to the zero function.
        out = RationalSpectrum{Complex(0.0), {Complex(0.0)}, {}};
    }
    out.validate();
    return out;
}

double integrate_abs2_residues(const RationalSpectrum& s) {
    s.validate();
    if (s.prefactor == Complex(0.0) || numerator_is_zero(s.numerator)) return 0.0;
    const int total = s.total_multiplicity();
    if (total > residue_multiplicity_guard) {
        throw OracleUnavailableError("residue oracle: total pole multiplicity exceeds guard");
    }

    // |s(k)|^2 continues to s(z) * sbar(z) with sbar the coefficient-conjugated
    // mirror; its poles are the poles of s plus their conjugates.
    std::vector<QComplex> num_q(s.numerator.size());
    for (std::size_t i = 0; i < s.numerator.size(); ++i) num_q[i] = from(s.numerator[i]);
    std::vector<QComplex> num_conj(num_q.size());
    for (std::size_t i = 0; i < num_q.size(); ++i) num_conj[i] = conj(num_q[i]);
    const std::vector<QComplex> numerator = convolve(num_q, num_conj);

    double pole_scale = 1.0;
    std::vector<MergedPole> poles;
    auto merge = [&poles](QComplex location, int count) {
        for (auto& pole : poles) {
            const QComplex d = pole.location - location;
            if (d.re == 0.0 && d.im == 0.0) {
                pole.multiplicity += count;
                return;
            }
        }
        poles.push_back({location, count});
    };
    for (const auto& pole : s.poles) {
        merge(from(pole.location), pole.multiplicity);
        merge(conj(from(pole.location)), pole.multiplicity);
        pole_scale = std::max(pole_scale, std::abs(pole.location));
    }

    for (std::size_t i = 0; i < poles.size(); ++i) {
        for (std::size_t j = i + 1; j < poles.size(); ++j) {
            if (static_cast<double>(qabs(poles[i].location - poles[j].location)) <
                1e-8 * pole_scale) {
                throw OracleUnavailableError(
                    "residue oracle: distinct poles too close for a stable expansion");
            }
        }
    }

    QComplex residue_sum{0.0, 0.0};
    qfloat residue_magnitude = 0.0;
    const int degree = static_cast<int>(numerator.size()) - 1;
    for (const auto& [location, m] : poles) {
        if (!(location.im > 0.0)) continue;

        // Taylor coefficients of the regular part g(z) = (z-p)^m F(z) at p,
        // truncated at order m-1; the residue is the top coefficient.
        std::vector<QComplex> series(m);
        for (int r = 0; r < m; ++r) {
            QComplex acc{0.0, 0.0};
            for (int j = r; j <= degree; ++j) {
                acc = acc + binomial(j, r) * (numerator[j] * pow_int(location, j - r));
            }
            series[r] = acc;
        }
        for (const auto& [other, mu] : poles) {
            const QComplex d = location - other;
            if (d.re == 0.0 && d.im == 0.0) continue;
            std::vector<QComplex> inverse(m);
            QComplex dm = pow_int(QComplex{1.0, 0.0} / d, mu);
            for (int n = 0; n < m; ++n) {
                const qfloat sign = (n % 2 == 0) ? 1.0 : -1.0;
                inverse[n] = (sign * binomial(mu + n - 1, n)) * dm;
                dm = dm / d;
            }
            std::vector<QComplex> next(m);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m - i; ++j) next[i + j] = next[i + j] + series[i] * inverse[j];
            }
            series = std::move(next);
        }
        residue_sum = residue_sum + series[m - 1];
        residue_magnitude += qabs(series[m - 1]);
    }

    // integral = 2*pi*i * residue_sum * |prefactor|^2; a real integrand leaves
    // only the imaginary component of the residue sum.
    const qfloat weight = abs2(from(s.prefactor));
    // 2*pi as a hi/lo double pair, exact to ~32 digits without Q literals
    const qfloat two_pi_q = qfloat(6.283185307179586) + qfloat(2.4492935982947064e-16);
    const qfloat value_q = -two_pi_q * residue_sum.im * weight;
    const qfloat leak = fabsq(two_pi_q * residue_sum.re * weight);
    const qfloat magnitude = two_pi_q * residue_magnitude * weight;

    double value = static_cast<double>(value_q);
    if (!std::isfinite(value)) {
        throw OracleUnavailableError("residue oracle: non-finite residue sum");
    }
    if (static_cast<double>(leak) > 1e-17 * std::max(static_cast<double>(magnitude), 1e-300)) {
        throw OracleUnavailableError("residue oracle: residue cancellation lost too many digits");
    }
    if (value < 0.0) {
        if (-value <= 1e-17 * static_cast<double>(magnitude)) return 0.0;
        throw OracleUnavailableError("residue oracle: negative value for a squared modulus");
    }
    return value;
}

double integrate_abs2_residues(const SpectralFunction& f) {
    return integrate_abs2_residues(to_rational(f));
}

} // namespace pfb
