#pragma once

#include <vector>

#include "striplab/field.hpp"

namespace striplab {

/// Smooth radial cutoffs for the horizontal dyadic decomposition.
///
/// psi is 1 on |z| <= 3/4 and 0 on |z| >= 4/3; phi(z) = psi(z/2) - psi(z) is
/// supported in 3/4 <= |z| <= 8/3. They satisfy, exactly by telescoping,
///   psi(z) + sum_{q >= 0} phi(2^-q z) = 1        for all z,
///   sum_{q in Z} phi(2^-q z) = 1                 for z != 0,
/// and blocks two or more apart have disjoint supports.
struct CutoffPair {
    double psi(double z) const;
    double phi(double z) const;
};

/// Dyadic indices [q_min, q_max] resolvable on a grid: 2^q_min is the first
/// dyad at or above (3/4) * 2*pi/Lx and the block at q_max still fits under
/// the Nyquist line, (8/3) * 2^q_max <= pi*nx/Lx.
struct DyadicRange {
    int q_min = 0;
    int q_max = 0;
    int count() const { return q_max - q_min + 1; }
    bool contains(int q) const { return q >= q_min && q <= q_max; }
};

/// Throws std::invalid_argument when no dyadic block fits the grid.
DyadicRange resolvable_range(const GridSpec& grid);

/// Largest |xi| whose dyadic partition weight is fully captured by blocks
/// q <= q_max, namely (3/2) * 2^q_max. Fields supported in this band (plus
/// the x-mean column) reconstruct exactly from the ladder.
double covered_xi(const GridSpec& grid);

/// Dyadic block Delta_q f (multiplier phi(2^-q |xi|)). q outside the
/// resolvable range throws std::out_of_range.
Field2D dyadic_project(const Field2D& f, int q);

/// Low-pass S_q f (multiplier psi(2^-q |xi|)). Any q is accepted: psi is a
/// plain multiplier and the paraproduct sums reach below the block range.
Field2D low_pass(const Field2D& f, int q);

/// Full decomposition of a field over the resolvable range.
struct DyadicLadder {
    DyadicRange range;
    Field2D low;                  ///< S_{q_min} f
    std::vector<Field2D> blocks;  ///< Delta_q f, q = q_min .. q_max
    double tail_rel = 0.0;        ///< relative L2 of f - low - sum blocks

    const Field2D& block(int q) const { return blocks.at(static_cast<size_t>(q - range.q_min)); }
};

DyadicLadder ladder(const Field2D& f);

}  // namespace striplab
