#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "striplab/field.hpp"

namespace striplab {

/// Horizontal profile: one complex value per FFT slot (a function of x only,
/// e.g. a vertical mean or a wall trace).
using Profile = Eigen::VectorXcd;

/// Forward transform of physical samples values[i*ny + j] = f(x_i, y_j) into
/// trigonometric coefficients: f(x, y_j) = sum_m coeff(m, j) exp(i xi_m x).
/// A pure cosine A*cos(xi_m x) therefore lands as coeff(+-m) = A/2.
Field2D transform(const GridSpec& grid, const std::vector<double>& values);

/// Inverse of transform; returns physical samples in the same layout.
/// The imaginary residue of a Hermitian field is discarded.
std::vector<double> inverse_transform(const Field2D& f);

/// Sample a closure f(x, y) on the grid and transform it.
Field2D sample(const GridSpec& grid, const std::function<double(double, double)>& f);

/// Exact horizontal derivative: mode m picks up i*xi_m. The Nyquist slot is
/// zeroed (the folded cosine has no representable odd derivative).
Field2D d_dx(const Field2D& f);

Field2D d_dy(const Field2D& f);
Field2D d2_dy2(const Field2D& f);

/// Antiderivative in y vanishing at the floor: (If)(x, y) = int_0^y f dy'.
Field2D integral_y_from_0(const Field2D& f);

/// Vertical mean int_0^1 f dy as a horizontal profile (indexed by slot).
Profile mean_y(const Field2D& f);

/// Trace f(., y_j) at collocation row j as a horizontal profile.
Profile wall_trace(const Field2D& f, int j);

/// Embed a horizontal profile as a y-constant field.
Field2D broadcast_y(const GridSpec& grid, const Profile& p);

/// Pointwise product, dealiased by evaluation on a 3/2-refined x grid: the
/// result is the exact product of the two trigonometric polynomials with
/// modes beyond nx/2 discarded.
Field2D multiply(const Field2D& f, const Field2D& g);

/// x-averaged L2 norm: sqrt( sum_m int_0^1 |coeff(m,y)|^2 dy ), i.e. the
/// Parseval form of (1/Lx) * int int |f|^2. All norms in the library use
/// this per-unit-period normalization.
double l2_norm(const Field2D& f);

/// L2_y norm of each slot's coefficient column, as a per-slot vector.
Eigen::VectorXd mode_l2(const Field2D& f);

/// max_{i,j} |f(x_i, y_j)| over the collocation lattice.
double max_abs(const Field2D& f);

}  // namespace striplab
