#include "pfb/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace pfb {

namespace {

// Gauss-Kronrod 7-15 abscissae and weights on [-1, 1]. Nodes at odd indices
// (and the center) form the embedded 7-point Gauss rule.
constexpr std::array<double, 8> kGK15Nodes = {
    0.99145537112081263921, 0.94910791234275852453, 0.86486442335976907279,
    0.74153118559939443986, 0.58608723546769113029, 0.40584515137739716691,
    0.20778495500789846760, 0.0};
constexpr std::array<double, 8> kGK15Weights = {
    0.02293532201052922496, 0.06309209262997855329, 0.10479001032225018384,
    0.14065325971552591875, 0.16900472663926790283, 0.19035057806478540991,
    0.20443294007529889241, 0.20948214108472782801};
constexpr std::array<double, 4> kGauss7Weights = {
    0.12948496616886969327, 0.27970539148927666790, 0.38183005050511894495,
    0.41795918367346938776};

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
};

// Worst error first; ties broken by position so the refinement order (and
// with it the result) is a pure function of the inputs.
struct WorstFirst {
    bool operator()(const Panel& x, const Panel& y) const {
        if (x.error != y.error) return x.error < y.error;
        return x.a > y.a;
    }
};

template <typename F>
Panel eval_panel(const F& g, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    const double fc = g(mid);
    long double k15 = kGK15Weights[7] * static_cast<long double>(fc);
    long double g7 = kGauss7Weights[3] * static_cast<long double>(fc);
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kGK15Nodes[i];
        const double sum = g(mid - dx) + g(mid + dx);
        k15 += kGK15Weights[i] * static_cast<long double>(sum);
        if (i % 2 == 1) g7 += kGauss7Weights[i / 2] * static_cast<long double>(sum);
    }
    k15 *= half;
    g7 *= half;
    return {a, b, static_cast<double>(k15), std::abs(static_cast<double>(k15 - g7))};
}

} // namespace

QuadratureResult integrate_abs2(const SpectralEvaluator& f, const QuadratureOptions& opt) {
    if (!(opt.tolerance > 0.0)) throw DomainError("integrate_abs2: tolerance must be > 0");
    if (!(opt.scale > 0.0) || !std::isfinite(opt.scale)) {
        throw DomainError("integrate_abs2: scale must be a positive finite real");
    }
    if (!(opt.lower < opt.upper)) throw DomainError("integrate_abs2: empty interval");

    const double half_pi = 0.5 * pi;
    auto theta_of = [&](double k) { return std::atan((k - opt.center) / opt.scale); };
    const double t_lo = std::isinf(opt.lower) ? -half_pi : theta_of(opt.lower);
    const double t_hi = std::isinf(opt.upper) ? half_pi : theta_of(opt.upper);

    std::size_t evaluations = 0;
    auto g = [&](double theta) {
        const double c = std::cos(theta);
        const double k = opt.center + opt.scale * std::tan(theta);
        ++evaluations;
        return std::norm(f(k)) * opt.scale / (c * c);
    };

    // Panel seeds: interval ends, mapped breakpoints, and a coarse uniform
    // split so the first error estimates are trustworthy.
    std::vector<double> seeds{t_lo, t_hi};
    for (double k : opt.breakpoints) {
        const double t = theta_of(k);
        if (t > t_lo && t < t_hi) seeds.push_back(t);
    }
    for (int i = 1; i < 8; ++i) seeds.push_back(t_lo + (t_hi - t_lo) * i / 8.0);
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-14; }),
                seeds.end());

    const double span = t_hi - t_lo;
    const double min_width = 1e-15 * span;
    const double target = 0.5 * opt.tolerance;

    // Global strategy: keep splitting the worst panel until the summed error
    // estimates meet the target. Effort follows the error, so narrow features
    // holding most of the mass are not starved of budget.
    std::vector<Panel> heap;
    heap.reserve(256);
    auto push = [&heap](const Panel& panel) {
        heap.push_back(panel);
        std::push_heap(heap.begin(), heap.end(), WorstFirst{});
    };
    long double err = 0.0;
    for (std::size_t i = 0; i + 1 < seeds.size(); ++i) {
        const Panel panel = eval_panel(g, seeds[i], seeds[i + 1]);
        err += panel.error;
        push(panel);
    }

    auto out_of_budget = [&] { return evaluations + 30 > opt.max_evaluations; };
    auto refine = [&](std::vector<Panel>& frozen) {
        while (err > target && !heap.empty() && !out_of_budget()) {
            std::pop_heap(heap.begin(), heap.end(), WorstFirst{});
            const Panel worst = heap.back();
            heap.pop_back();
            if (worst.b - worst.a <= min_width) {
                frozen.push_back(worst);
                continue;
            }
            const double mid = 0.5 * (worst.a + worst.b);
            const Panel left = eval_panel(g, worst.a, mid);
            const Panel right = eval_panel(g, mid, worst.b);
            err += static_cast<long double>(left.error) + right.error - worst.error;
            push(left);
            push(right);
        }
        heap.insert(heap.end(), frozen.begin(), frozen.end());
        std::make_heap(heap.begin(), heap.end(), WorstFirst{});
        frozen.clear();
    };
    auto current_value = [&heap] {
        std::vector<const Panel*> ordered;
        ordered.reserve(heap.size());
        for (const Panel& panel : heap) ordered.push_back(&panel);
        std::sort(ordered.begin(), ordered.end(),
                  [](const Panel* x, const Panel* y) { return x->a < y->a; });
        long double total = 0.0;
        for (const Panel* panel : ordered) total += panel->value;
        return static_cast<double>(total);
    };

    // The Gauss/Kronrod difference can undershoot the true Kronrod error on
    // barely-resolved features, so convergence is also verified directly:
    // halve every panel and require the value to move by less than the
    // target. Repeat with further refinement until both conditions hold.
    std::vector<Panel> frozen;
    double delta = 0.0;
    bool verified = false;
    for (int stage = 0; stage < 24 && !verified; ++stage) {
        refine(frozen);
        if (err > target) break;  // budget or width floor, not convergence
        const double before = current_value();
        std::vector<Panel> halved;
        halved.reserve(2 * heap.size());
        err = 0.0;
        for (const Panel& panel : heap) {
            if (panel.b - panel.a <= min_width || out_of_budget()) {
                halved.push_back(panel);
                err += panel.error;
                continue;
            }
            const double mid = 0.5 * (panel.a + panel.b);
            const Panel left = eval_panel(g, panel.a, mid);
            const Panel right = eval_panel(g, mid, panel.b);
            halved.push_back(left);
            halved.push_back(right);
            err += static_cast<long double>(left.error) + right.error;
        }
        heap = std::move(halved);
        std::make_heap(heap.begin(), heap.end(), WorstFirst{});
        delta = std::abs(current_value() - before);
        verified = delta <= target && err <= target;
    }

    QuadratureResult result{current_value(),
                            std::max(static_cast<double>(err), delta), evaluations};
    if (!verified) {
        throw AccuracyError("integrate_abs2: failed to reach tolerance " +
                                std::to_string(opt.tolerance) + " (best error estimate " +
                                std::to_string(result.error_estimate) + ")",
                            result.value, result.error_estimate);
    }
    if (result.value < 0.0) result.value = 0.0;  // roundoff on a vanishing integrand
    return result;
}

QuadratureOptions options_for(const SpectralFunction& f, double tolerance) {
    QuadratureOptions opt;
    opt.tolerance = tolerance;
    opt.center = f.params().k_c;
    opt.scale = f.narrowest_width();
    for (double offset : f.feature_offsets()) opt.breakpoints.push_back(opt.center + offset);
    return opt;
}

QuadratureResult integrate_abs2(const SpectralFunction& f, double tolerance) {
    return integrate_abs2([&f](double k) { return f(k); }, options_for(f, tolerance));
}

SpectralFunction normalize(const SpectralFunction& f, double tolerance) {
    const QuadratureResult total = integrate_abs2(f, tolerance);
    if (!(total.value > 0.0)) {
        throw DegenerateSpectrumError("normalize: spectral function has zero norm");
    }
    SpectralFunction result = f;
    result.set_norm(f.norm() * std::sqrt(total.value));
    return result;
}

} // namespace pfb
