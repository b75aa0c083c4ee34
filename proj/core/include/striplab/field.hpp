#pragma once

#include <complex>
#include <vector>

#include "striplab/grid.hpp"

namespace striplab {

/// A scalar field on the strip, stored horizontally spectral and vertically
/// collocated: coeff(m, j) is the Fourier coefficient of mode m at height
/// y_j, with f(x, y_j) = sum_m coeff(m, j) * exp(i*xi_m*x).
///
/// Real-valued fields keep the Hermitian symmetry coeff(-m) = conj(coeff(m));
/// every operation in the library preserves it.
class Field2D {
public:
    using Complex = std::complex<double>;

    Field2D() = default;
    explicit Field2D(const GridSpec& grid)
        : grid_(grid), data_(static_cast<size_t>(grid.nx) * static_cast<size_t>(grid.ny)) {
        grid.validate();
    }

    const GridSpec& grid() const { return grid_; }
    int nx() const { return grid_.nx; }
    int ny() const { return grid_.ny; }
    bool empty() const { return data_.empty(); }

    /// Coefficient by FFT slot k in [0, nx).
    Complex& slot(int k, int j) { return data_[static_cast<size_t>(k) * ny() + j]; }
    const Complex& slot(int k, int j) const { return data_[static_cast<size_t>(k) * ny() + j]; }

    /// Coefficient by signed mode m in [-nx/2, nx/2].
    Complex& coeff(int m, int j) { return slot(grid_.slot_of_mode(m), j); }
    const Complex& coeff(int m, int j) const { return slot(grid_.slot_of_mode(m), j); }

    Complex* data() { return data_.data(); }
    const Complex* data() const { return data_.data(); }
    size_t size() const { return data_.size(); }

    /// True when every coefficient is finite.
    bool finite() const;

    /// max_{m,j} |coeff(-m,j) - conj(coeff(m,j))|; zero for real fields.
    double hermitian_defect() const;

    /// Restore exact Hermitian symmetry by averaging paired slots.
    void symmetrize();

    Field2D& operator+=(const Field2D& other);
    Field2D& operator-=(const Field2D& other);
    Field2D& operator*=(double s);

    friend Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
    friend Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
    friend Field2D operator*(double s, Field2D a) { return a *= s; }

private:
    GridSpec grid_;
    std::vector<Complex> data_;
};

}  // namespace striplab
