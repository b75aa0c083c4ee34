#include "striplab/grid.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace striplab {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

/// Chebyshev-Gauss-Lobatto differentiation matrix on the standard descending
/// grid x_i = cos(i*pi/n), i = 0..n (Trefethen, Spectral Methods in MATLAB,
/// with the negated-row-sum diagonal for better roundoff behavior).
Eigen::MatrixXd cheb_diff_standard(int n) {
    const int np = n + 1;
    Eigen::VectorXd x(np), c(np);
    for (int i = 0; i <= n; ++i) {
        x(i) = std::cos(kPi * i / n);
        c(i) = (i == 0 || i == n) ? 2.0 : 1.0;
        if (i % 2 == 1) c(i) = -c(i);
    }
    Eigen::MatrixXd D(np, np);
    for (int i = 0; i <= n; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j <= n; ++j) {
            if (i == j) continue;
            D(i, j) = (c(i) / c(j)) / (x(i) - x(j));
            rowsum += D(i, j);
        }
        D(i, i) = -rowsum;
    }
    return D;
}

/// Values at descending CGL nodes -> Chebyshev coefficients a_0..a_n
/// (type-I DCT with halved endpoint terms).
Eigen::MatrixXd cheb_val2coef(int n) {
    const int np = n + 1;
    Eigen::MatrixXd C(np, np);
    for (int k = 0; k <= n; ++k) {
        const double ck = (k == 0 || k == n) ? 2.0 : 1.0;
        for (int i = 0; i <= n; ++i) {
            const double ci = (i == 0 || i == n) ? 2.0 : 1.0;
            C(k, i) = (2.0 / (n * ck * ci)) * std::cos(kPi * k * i / n);
        }
    }
    return C;
}

/// Chebyshev coefficients -> values at ascending-[0,1] CGL nodes.
Eigen::MatrixXd cheb_coef2val_ascending(int n) {
    const int np = n + 1;
    Eigen::MatrixXd E(np, np);
    for (int j = 0; j <= n; ++j) {
        // ascending node j corresponds to standard index n-j
        for (int k = 0; k <= n; ++k) E(j, k) = std::cos(kPi * k * (n - j) / n);
    }
    return E;
}

VerticalOps build_chebyshev(int ny) {
    const int n = ny - 1;
    VerticalOps ops;

    ops.y.resize(ny);
    for (int j = 0; j < ny; ++j)
        ops.y(j) = 0.5 * (1.0 - std::cos(kPi * j / n));

    // Differentiate on the standard grid, then flip to ascending order and
    // rescale from [-1,1] to [0,1] (chain rule factor 2).
    Eigen::MatrixXd Dstd = cheb_diff_standard(n);
    Eigen::MatrixXd Dasc(ny, ny);
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < ny; ++j) Dasc(i, j) = Dstd(n - i, n - j);
    ops.D = 2.0 * Dasc;
    ops.D2 = ops.D * ops.D;

    // Antiderivative in coefficient space: with the plain convention
    // f = sum a_k T_k (no halved a_0), the antiderivative F = sum b_k T_k
    // has b_1 = a_0 - a_2/2 and b_k = (a_{k-1} - a_{k+1}) / (2k) for k >= 2,
    // pinned by F(-1) = 0. The degree-(n+1) overflow term is folded onto
    // T_{n-1}, with which it agrees on this node set (and at x = -1, so the
    // pin is unaffected). That keeps Q exact through degree n-1 and leaves
    // only a rank-one O(a_n) defect in D*Q - I, the minimum a singular D
    // allows.
    Eigen::MatrixXd C = cheb_val2coef(n);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(ny, ny);
    for (int k = 1; k <= n; ++k) {
        S(k, k - 1) += 1.0 / (2.0 * k);
        if (k + 1 <= n) S(k, k + 1) -= 1.0 / (2.0 * k);
    }
    S(1, 0) = 1.0;
    S(n - 1, n) += 1.0 / (2.0 * (n + 1.0));
    for (int k = 1; k <= n; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        S.row(0) -= sign * S.row(k);  // enforce F(-1) = 0
    }
    Eigen::MatrixXd E = cheb_coef2val_ascending(n);
    // Values arrive in ascending order; C expects the standard (descending)
    // order, so flip columns first. Factor 1/2 maps dt to dy.
    Eigen::MatrixXd flip = Eigen::MatrixXd::Zero(ny, ny);
    for (int j = 0; j < ny; ++j) flip(j, n - j) = 1.0;
    ops.Q = 0.5 * E * S * C * flip;

    // Clenshaw-Curtis: integral of T_k over [-1,1] is 2/(1-k^2) for even k.
    Eigen::VectorXd g = Eigen::VectorXd::Zero(ny);
    for (int k = 0; k <= n; k += 2) g(k) = 2.0 / (1.0 - double(k) * k);
    Eigen::VectorXd wstd = C.transpose() * g;
    ops.w.resize(ny);
    for (int j = 0; j < ny; ++j) ops.w(j) = 0.5 * wstd(n - j);
    return ops;
}

VerticalOps build_fd(int ny) {
    const int n = ny - 1;
    const double h = 1.0 / n;
    VerticalOps ops;

    ops.y.resize(ny);
    for (int j = 0; j < ny; ++j) ops.y(j) = j * h;

    ops.D = Eigen::MatrixXd::Zero(ny, ny);
    for (int j = 1; j < n; ++j) {
        ops.D(j, j - 1) = -0.5 / h;
        ops.D(j, j + 1) = 0.5 / h;
    }
    ops.D(0, 0) = -1.5 / h;
    ops.D(0, 1) = 2.0 / h;
    ops.D(0, 2) = -0.5 / h;
    ops.D(n, n) = 1.5 / h;
    ops.D(n, n - 1) = -2.0 / h;
    ops.D(n, n - 2) = 0.5 / h;

    ops.D2 = Eigen::MatrixXd::Zero(ny, ny);
    const double h2 = h * h;
    for (int j = 1; j < n; ++j) {
        ops.D2(j, j - 1) = 1.0 / h2;
        ops.D2(j, j) = -2.0 / h2;
        ops.D2(j, j + 1) = 1.0 / h2;
    }
    ops.D2(0, 0) = 2.0 / h2;
    ops.D2(0, 1) = -5.0 / h2;
    ops.D2(0, 2) = 4.0 / h2;
    ops.D2(0, 3) = -1.0 / h2;
    ops.D2(n, n) = 2.0 / h2;
    ops.D2(n, n - 1) = -5.0 / h2;
    ops.D2(n, n - 2) = 4.0 / h2;
    ops.D2(n, n - 3) = -1.0 / h2;

    // Cumulative trapezoid for Q, plain trapezoid for w.
    ops.Q = Eigen::MatrixXd::Zero(ny, ny);
    for (int j = 1; j < ny; ++j) {
        ops.Q.row(j) = ops.Q.row(j - 1);
        ops.Q(j, j - 1) += 0.5 * h;
        ops.Q(j, j) += 0.5 * h;
    }
    ops.w = Eigen::VectorXd::Constant(ny, h);
    ops.w(0) = 0.5 * h;
    ops.w(n) = 0.5 * h;
    return ops;
}

}  // namespace

const char* to_string(VerticalScheme scheme) {
    return scheme == VerticalScheme::ChebyshevCollocation ? "chebyshev" : "fd2";
}

void GridSpec::validate() const {
    if (!(Lx > 0.0))
        throw std::invalid_argument("GridSpec: Lx must be positive, got " + std::to_string(Lx));
    if (nx < 8 || nx % 2 != 0)
        throw std::invalid_argument("GridSpec: nx must be even and >= 8, got " + std::to_string(nx));
    if (ny < 9)
        throw std::invalid_argument("GridSpec: ny must be >= 9, got " + std::to_string(ny));
}

std::vector<double> GridSpec::x_nodes() const {
    std::vector<double> x(static_cast<size_t>(nx));
    for (int i = 0; i < nx; ++i) x[static_cast<size_t>(i)] = Lx * i / nx;
    return x;
}

const VerticalOps& VerticalOps::get(const GridSpec& grid) {
    grid.validate();
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<VerticalOps>> cache;
    const std::pair<int, int> key{grid.ny, static_cast<int>(grid.vertical)};

    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end()) {
        auto ops = std::make_unique<VerticalOps>(
            grid.vertical == VerticalScheme::ChebyshevCollocation ? build_chebyshev(grid.ny)
                                                                  : build_fd(grid.ny));
        it = cache.emplace(key, std::move(ops)).first;
    }
    return *it->second;
}

}  // namespace striplab
