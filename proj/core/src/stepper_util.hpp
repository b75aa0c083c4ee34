#pragma once

// Internal helpers shared by the two time steppers: packing complex fields
// into interior-row real matrices (one column per FFT slot) so the vertical
// solves batch into dense Eigen products.

#include <Eigen/Dense>

#include "striplab/field.hpp"
#include "striplab/grid.hpp"

namespace striplab::detail {

/// Dirichlet bump with unit mass under the scheme's own quadrature, used to
/// repair vertical-mean defects without touching the walls.
inline Eigen::VectorXd unit_mass_bump(const GridSpec& grid) {
    const auto& ops = VerticalOps::get(grid);
    Eigen::VectorXd g(grid.ny);
    for (int j = 0; j < grid.ny; ++j) g(j) = 6.0 * ops.y(j) * (1.0 - ops.y(j));
    const double mass = ops.w.dot(g);
    return g / mass;
}

struct Packed {
    Eigen::MatrixXd re;
    Eigen::MatrixXd im;
};

inline Packed pack_interior(const Field2D& f) {
    const int nx = f.nx(), ni = f.ny() - 2;
    Packed p{Eigen::MatrixXd(ni, nx), Eigen::MatrixXd(ni, nx)};
    for (int k = 0; k < nx; ++k)
        for (int j = 0; j < ni; ++j) {
            p.re(j, k) = f.slot(k, j + 1).real();
            p.im(j, k) = f.slot(k, j + 1).imag();
        }
    return p;
}

/// Writes interior rows back and pins the walls to zero.
inline void unpack_interior(const Packed& p, Field2D& f) {
    const int nx = f.nx(), ni = f.ny() - 2;
    for (int k = 0; k < nx; ++k) {
        f.slot(k, 0) = {0.0, 0.0};
        for (int j = 0; j < ni; ++j) f.slot(k, j + 1) = {p.re(j, k), p.im(j, k)};
        f.slot(k, f.ny() - 1) = {0.0, 0.0};
    }
}

inline void zero_walls(Field2D& f) {
    for (int k = 0; k < f.nx(); ++k) {
        f.slot(k, 0) = {0.0, 0.0};
        f.slot(k, f.ny() - 1) = {0.0, 0.0};
    }
}

}  // namespace striplab::detail
