#include "striplab/field.hpp"

#include <cmath>
#include <stdexcept>

namespace striplab {

namespace {

void require_same_grid(const Field2D& a, const Field2D& b, const char* op) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument(std::string(op) + ": fields live on different grids");
}

}  // namespace

bool Field2D::finite() const {
    for (const Complex& c : data_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

double Field2D::hermitian_defect() const {
    double worst = 0.0;
    const int half = nx() / 2;
    for (int m = 0; m <= half; ++m) {
        const int kp = grid_.slot_of_mode(m);
        const int km = grid_.slot_of_mode(m == half ? half : -m);
        for (int j = 0; j < ny(); ++j) {
            const Complex d = slot(km, j) - std::conj(slot(kp, j));
            worst = std::max(worst, std::abs(d));
        }
    }
    return worst;
}

void Field2D::symmetrize() {
    const int half = nx() / 2;
    for (int j = 0; j < ny(); ++j) {
        slot(0, j) = Complex(slot(0, j).real(), 0.0);
        slot(half, j) = Complex(slot(half, j).real(), 0.0);
    }
    for (int m = 1; m < half; ++m) {
        const int kp = grid_.slot_of_mode(m);
        const int km = grid_.slot_of_mode(-m);
        for (int j = 0; j < ny(); ++j) {
            const Complex avg = 0.5 * (slot(kp, j) + std::conj(slot(km, j)));
            slot(kp, j) = avg;
            slot(km, j) = std::conj(avg);
        }
    }
}

Field2D& Field2D::operator+=(const Field2D& other) {
    require_same_grid(*this, other, "Field2D::operator+=");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Field2D& Field2D::operator-=(const Field2D& other) {
    require_same_grid(*this, other, "Field2D::operator-=");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Field2D& Field2D::operator*=(double s) {
    for (Complex& c : data_) c *= s;
    return *this;
}

}  // namespace striplab
