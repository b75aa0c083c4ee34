#include "striplab/cutoff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "striplab/spectral.hpp"

namespace striplab {

namespace {

double smooth_step(double t) {
    // C-infinity ramp: 0 for t <= 0, 1 for t >= 1.
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

constexpr double kInner = 0.75;         // 3/4
constexpr double kOuter = 4.0 / 3.0;    // 4/3

/// Multiply each mode by a function of |xi|.
template <typename Fn>
Field2D scale_modes(const Field2D& f, Fn&& factor) {
    Field2D out(f.grid());
    for (int k = 0; k < f.nx(); ++k) {
        const double axi = std::abs(f.grid().xi(f.grid().mode_of_slot(k)));
        const double c = factor(axi);
        if (c == 0.0) continue;
        for (int j = 0; j < f.ny(); ++j) out.slot(k, j) = c * f.slot(k, j);
    }
    return out;
}

}  // namespace

double CutoffPair::psi(double z) const {
    return smooth_step((kOuter - std::abs(z)) / (kOuter - kInner));
}

double CutoffPair::phi(double z) const { return psi(0.5 * z) - psi(z); }

DyadicRange resolvable_range(const GridSpec& grid) {
    grid.validate();
    const double xi1 = GridSpec::two_pi() / grid.Lx;
    const double ximax = grid.xi_max();
    // Nudge by an ulp-scale amount so exact powers of two land on the dyad.
    const int q_min = static_cast<int>(std::ceil(std::log2(0.75 * xi1) - 1e-12));
    const int q_max = static_cast<int>(std::floor(std::log2(0.375 * ximax) + 1e-12));
    if (q_min > q_max)
        throw std::invalid_argument("resolvable_range: no dyadic block fits (q_min " +
                                    std::to_string(q_min) + " > q_max " + std::to_string(q_max) +
                                    "); refine nx or shrink Lx");
    return {q_min, q_max};
}

double covered_xi(const GridSpec& grid) {
    return 1.5 * std::ldexp(1.0, resolvable_range(grid).q_max);
}

Field2D dyadic_project(const Field2D& f, int q) {
    const DyadicRange range = resolvable_range(f.grid());
    if (!range.contains(q))
        throw std::out_of_range("dyadic_project: q = " + std::to_string(q) +
                                " outside resolvable range [" + std::to_string(range.q_min) +
                                ", " + std::to_string(range.q_max) + "]");
    const CutoffPair cut;
    const double inv = std::ldexp(1.0, -q);
    return scale_modes(f, [&](double axi) { return cut.phi(inv * axi); });
}

Field2D low_pass(const Field2D& f, int q) {
    const CutoffPair cut;
    const double inv = std::ldexp(1.0, -q);
    return scale_modes(f, [&](double axi) { return cut.psi(inv * axi); });
}

DyadicLadder ladder(const Field2D& f) {
    DyadicLadder lad;
    lad.range = resolvable_range(f.grid());
    lad.low = low_pass(f, lad.range.q_min);
    lad.blocks.reserve(static_cast<size_t>(lad.range.count()));
    Field2D sum = lad.low;
    for (int q = lad.range.q_min; q <= lad.range.q_max; ++q) {
        lad.blocks.push_back(dyadic_project(f, q));
        sum += lad.blocks.back();
    }
    const double denom = l2_norm(f);
    lad.tail_rel = denom > 0.0 ? l2_norm(f - sum) / denom : 0.0;
    return lad;
}

}  // namespace striplab
