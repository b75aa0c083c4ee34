#pragma once

#include <Eigen/Dense>
#include <vector>

namespace striplab {

/// Vertical discretization scheme for the strip (0,1).
enum class VerticalScheme {
    ChebyshevCollocation,  ///< Chebyshev-Gauss-Lobatto nodes, spectral accuracy
    FiniteDifference2      ///< uniform nodes, 2nd-order stencils (cross-validation)
};

/// Config-file spelling: "chebyshev" / "fd2".
const char* to_string(VerticalScheme scheme);

/// Discrete layout of the periodic strip [0,Lx) x [0,1].
///
/// Horizontal: nx Fourier modes, wavenumbers xi_m = 2*pi*m/Lx for |m| <= nx/2
/// (the +nx/2 and -nx/2 modes share one storage slot as usual for real data).
/// Vertical: ny collocation points with y[0] = 0 and y[ny-1] = 1.
struct GridSpec {
    double Lx = 6.283185307179586476925286766559;  // 2*pi
    int nx = 64;
    int ny = 65;
    VerticalScheme vertical = VerticalScheme::ChebyshevCollocation;

    /// Throws std::invalid_argument unless nx is even and >= 8, ny >= 9, Lx > 0.
    void validate() const;

    /// Wavenumber of signed mode m (|m| <= nx/2).
    double xi(int m) const { return two_pi() * static_cast<double>(m) / Lx; }

    /// Largest resolved wavenumber magnitude, pi*nx/Lx (the Nyquist line).
    double xi_max() const { return xi(nx / 2); }

    /// Signed mode number of FFT storage slot k in [0, nx).
    int mode_of_slot(int k) const { return k <= nx / 2 ? k : k - nx; }

    /// Storage slot of signed mode m in [-nx/2, nx/2].
    int slot_of_mode(int m) const { return m >= 0 ? m : m + nx; }

    /// Equispaced physical abscissae x_i = i*Lx/nx.
    std::vector<double> x_nodes() const;

    bool operator==(const GridSpec&) const = default;

    static constexpr double two_pi() { return 6.283185307179586476925286766559; }
};

/// Discrete vertical calculus bound to one (ny, scheme) pair.
///
/// All matrices act on grid values along y. For the Chebyshev scheme D, D2
/// and Q are spectrally accurate (Q is exact on polynomials of degree
/// <= ny-2, so D*Q = I there); for the FD scheme everything is 2nd order.
struct VerticalOps {
    Eigen::VectorXd y;    ///< nodes, ascending, y(0) = 0, y(ny-1) = 1
    Eigen::MatrixXd D;    ///< d/dy
    Eigen::MatrixXd D2;   ///< d^2/dy^2
    Eigen::MatrixXd Q;    ///< (Q f)(y_j) = integral of f from 0 to y_j
    Eigen::VectorXd w;    ///< quadrature weights: w.dot(f) = integral over (0,1)

    /// Shared per-(ny, scheme) instance; built once, cached, thread safe.
    static const VerticalOps& get(const GridSpec& grid);
};

}  // namespace striplab
