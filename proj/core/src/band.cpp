#include "striplab/band.hpp"

#include <cmath>
#include <limits>

namespace striplab {

const char* to_string(ClockKind kind) {
    switch (kind) {
        case ClockKind::Theta: return "theta";
        case ClockKind::Tau: return "tau";
        case ClockKind::Eta: return "eta";
    }
    return "?";
}

AnalyticBandState make_band(double a, double rate, ClockKind kind, const GridSpec& grid) {
    grid.validate();
    if (!(a > 0.0))
        throw std::invalid_argument("make_band: band width a must be positive, got " +
                                    std::to_string(a));
    if (!(rate >= 0.0))
        throw std::invalid_argument("make_band: shrink rate must be nonnegative, got " +
                                    std::to_string(rate));
    const double cap = a * grid.xi_max();
    if (cap > 300.0)
        throw std::invalid_argument(
            "make_band: exponent a*xi_max = " + std::to_string(cap) +
            " exceeds 300; weighted norms would overflow (shrink a or the grid)");
    AnalyticBandState band;
    band.a = a;
    band.rate = rate;
    band.kind = kind;
    band.history.push_back({0.0, 0.0, a});
    return band;
}

Field2D apply_weight(const Field2D& f, const AnalyticBandState& band) {
    const double width = band.band_width();
    if (width <= 0.0)
        throw BandExhaustedError(crossing_time(band),
                                 "apply_weight: analytic band exhausted (width " +
                                     std::to_string(width) + ", " + to_string(band.kind) +
                                     " clock = " + std::to_string(band.clock) + ")");
    return apply_weight_width(f, width);
}

Field2D apply_weight_width(const Field2D& f, double width) {
    if (!(width >= 0.0))
        throw std::invalid_argument("apply_weight_width: width must be nonnegative");
    Field2D out(f.grid());
    for (int k = 0; k < f.nx(); ++k) {
        const double axi = std::abs(f.grid().xi(f.grid().mode_of_slot(k)));
        const double c = std::exp(width * axi);
        for (int j = 0; j < f.ny(); ++j) out.slot(k, j) = c * f.slot(k, j);
    }
    return out;
}

Field2D plus_abs(const Field2D& f) {
    Field2D out(f.grid());
    for (int k = 0; k < f.nx(); ++k)
        for (int j = 0; j < f.ny(); ++j) out.slot(k, j) = std::abs(f.slot(k, j));
    return out;
}

double step_clock(AnalyticBandState& band, double driver_norm, double dt) {
    if (!(driver_norm >= 0.0))
        throw std::invalid_argument("step_clock: driver norm must be nonnegative, got " +
                                    std::to_string(driver_norm) +
                                    " (clock invariant: nondecreasing)");
    if (!(dt > 0.0))
        throw std::invalid_argument("step_clock: dt must be positive");
    band.clock += dt * driver_norm;
    band.t += dt;
    band.history.push_back({band.t, band.clock, band.band_width()});
    return band.band_width();
}

double crossing_time(const AnalyticBandState& band) {
    if (!band.exhausted()) return std::numeric_limits<double>::quiet_NaN();
    // Walk back to the first exhausted sample and interpolate from its
    // predecessor (width is piecewise linear in t between samples).
    for (size_t i = 1; i < band.history.size(); ++i) {
        const ClockSample& prev = band.history[i - 1];
        const ClockSample& cur = band.history[i];
        if (cur.band_width <= 0.0 && prev.band_width > 0.0) {
            const double span = prev.band_width - cur.band_width;
            if (span <= 0.0) return cur.t;
            return prev.t + (cur.t - prev.t) * prev.band_width / span;
        }
    }
    return band.history.empty() ? 0.0 : band.history.front().t;
}

ConvexityReport convexity_check(double xi, double eta, const AnalyticBandState& band) {
    const double width = std::max(band.band_width(), 0.0);
    ConvexityReport rep;
    rep.lhs = width * std::abs(xi);
    rep.rhs = width * std::abs(xi - eta) + width * std::abs(eta);
    rep.ok = rep.lhs <= rep.rhs * (1.0 + 1e-14) + 1e-300;
    return rep;
}

}  // namespace striplab
