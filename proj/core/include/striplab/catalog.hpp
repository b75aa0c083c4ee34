#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "striplab/field.hpp"

namespace striplab {

/// Parameters for a named initial-data family. Unused knobs are ignored by
/// families that do not consume them.
struct CatalogRequest {
    std::string name = "gauss-sine";
    double amplitude = 1.0;
    int mode = 3;           ///< cos-mode: horizontal integer mode
    int vertical_mode = 2;  ///< cos-mode: n in sin(n pi y)
    double sigma = 0.0;     ///< gauss-sine: Gaussian width, 0 -> Lx/8
    int max_mode = 12;      ///< random-band: highest filled |m|
    std::uint64_t seed = 1234;

    bool operator==(const CatalogRequest&) const = default;
};

struct InitialData {
    Field2D u0;
    Field2D u1;
};

/// Names accepted by make_datum, in catalog order.
const std::vector<std::string>& catalog_names();

/// Builds the requested data on the grid. All families return real fields
/// vanishing at both walls with zero vertical mean per mode, so the
/// hydrostatic compatibility diagnosis accepts them as-is.
///
///   zero        u0 = u1 = 0.
///   gauss-sine  u0 = A * G(x) * sin(2 pi y), u1 = 0, where G is a
///               periodized Gaussian centered at Lx/2, x-mean removed and
///               the (already negligible) tail above the covered dyadic
///               band dropped so every ladder identity applies exactly.
///   cos-mode    u0 = A * cos(xi_m x) * sin(n pi y), u1 = 0; n must be even
///               (odd profiles carry a vertical mean). The linearized
///               dynamics of this datum is the exact modal oscillator
///               sigma^2 + sigma + (n pi)^2 = 0.
///   random-band seeded draw: modes 1..max_mode with exp(-m/4) decay and
///               random even sin(j pi y) profiles, j = 2..8, in u0 and u1.
///
/// Throws std::invalid_argument for unknown names (message lists the
/// catalog) or out-of-range parameters.
InitialData make_datum(const GridSpec& grid, const CatalogRequest& request);

}  // namespace striplab
