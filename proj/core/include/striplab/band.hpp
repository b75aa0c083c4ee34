#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "striplab/field.hpp"

namespace striplab {

/// Which nonlinear clock drives the band shrinkage.
enum class ClockKind { Theta, Tau, Eta };

const char* to_string(ClockKind kind);

/// Thrown when a weighted operation is requested after the analytic band
/// has closed (a - rate*clock <= 0).
class BandExhaustedError : public std::runtime_error {
public:
    BandExhaustedError(double crossing_time, const std::string& what)
        : std::runtime_error(what), crossing_time_(crossing_time) {}
    /// Simulation time at which the band width crossed zero (linearly
    /// interpolated within the offending step).
    double crossing_time() const { return crossing_time_; }

private:
    double crossing_time_;
};

struct ClockSample {
    double t = 0.0;
    double clock = 0.0;
    double band_width = 0.0;
};

/// Shrinking analytic band: mode m carries weight exp((a - rate*clock)|xi_m|).
///
/// The clock is a nondecreasing integral of a solution norm; once
/// a - rate*clock reaches zero the band is exhausted and weighted operations
/// refuse to run. States are created through make_band, which enforces the
/// exponent cap a*xi_max <= 300 (beyond it exp overflows double range once
/// norms are squared).
struct AnalyticBandState {
    double a = 0.0;
    double rate = 0.0;
    double clock = 0.0;
    double t = 0.0;
    ClockKind kind = ClockKind::Theta;
    std::vector<ClockSample> history;

    double band_width() const { return a - rate * clock; }
    bool exhausted() const { return band_width() <= 0.0; }
};

/// Validates and seeds a band state (history starts with the t = 0 sample).
AnalyticBandState make_band(double a, double rate, ClockKind kind, const GridSpec& grid);

/// Multiply mode m by exp(band_width * |xi_m|). Throws BandExhaustedError
/// when the band is exhausted.
Field2D apply_weight(const Field2D& f, const AnalyticBandState& band);

/// Same weight with a caller-chosen width (used for data norms at width a).
Field2D apply_weight_width(const Field2D& f, double width);

/// Replace every coefficient by its modulus. Mode-wise |.| preserves each
/// column's L2 norm, so ||f+|| = ||f||, and dominates products coefficient
/// by coefficient.
Field2D plus_abs(const Field2D& f);

/// Advance the clock by dt with the given nonnegative driver norm and append
/// a history sample. Negative driver or nonpositive dt throws
/// std::invalid_argument. Returns the new band width (possibly <= 0; the
/// caller decides whether exhaustion is an event or an error).
double step_clock(AnalyticBandState& band, double driver_norm, double dt);

/// Crossing time inferred from the last two history samples once the band
/// is exhausted; NaN while the band is still open.
double crossing_time(const AnalyticBandState& band);

/// Subadditivity of the weight exponent at the current width:
/// width*|xi| <= width*|xi - eta| + width*|eta|.
struct ConvexityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};
ConvexityReport convexity_check(double xi, double eta, const AnalyticBandState& band);

}  // namespace striplab
