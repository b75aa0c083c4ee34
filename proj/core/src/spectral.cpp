#include "striplab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace striplab {

namespace {

/// Process-wide cache of FFTW plans, one forward/backward pair per length.
/// Plans are created with FFTW_ESTIMATE for run-to-run determinism and
/// FFTW_UNALIGNED so they can execute on any caller buffer.
class Fft {
public:
    static Fft& instance() {
        static Fft fft;
        return fft;
    }

    void forward(int n, std::complex<double>* buf) { execute(n, buf, /*sign=*/FFTW_FORWARD); }
    void backward(int n, std::complex<double>* buf) { execute(n, buf, /*sign=*/FFTW_BACKWARD); }

private:
    struct PlanPair {
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
    };

    void execute(int n, std::complex<double>* buf, int sign) {
        const PlanPair& p = plans_for(n);
        auto* c = reinterpret_cast<fftw_complex*>(buf);
        fftw_execute_dft(sign == FFTW_FORWARD ? p.fwd : p.bwd, c, c);
    }

    const PlanPair& plans_for(int n) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(n);
        if (it == plans_.end()) {
            std::vector<std::complex<double>> scratch(static_cast<size_t>(n));
            auto* c = reinterpret_cast<fftw_complex*>(scratch.data());
            PlanPair p;
            const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
            p.fwd = fftw_plan_dft_1d(n, c, c, FFTW_FORWARD, flags);
            p.bwd = fftw_plan_dft_1d(n, c, c, FFTW_BACKWARD, flags);
            it = plans_.emplace(n, p).first;
        }
        return it->second;
    }

    std::mutex mu_;
    std::map<int, PlanPair> plans_;
};

void require_same_grid(const Field2D& a, const Field2D& b, const char* op) {
    if (!(a.grid() == b.grid()))
        throw std::invalid_argument(std::string(op) + ": fields live on different grids");
}

/// Apply a real ny-by-ny matrix to every coefficient column.
Field2D apply_vertical(const Eigen::MatrixXd& A, const Field2D& f) {
    const int nx = f.nx(), ny = f.ny();
    Field2D out(f.grid());
    Eigen::VectorXd re(ny), im(ny);
    for (int k = 0; k < nx; ++k) {
        for (int j = 0; j < ny; ++j) {
            re(j) = f.slot(k, j).real();
            im(j) = f.slot(k, j).imag();
        }
        const Eigen::VectorXd rout = A * re;
        const Eigen::VectorXd iout = A * im;
        for (int j = 0; j < ny; ++j) out.slot(k, j) = {rout(j), iout(j)};
    }
    return out;
}

}  // namespace

Field2D transform(const GridSpec& grid, const std::vector<double>& values) {
    grid.validate();
    const int nx = grid.nx, ny = grid.ny;
    if (values.size() != static_cast<size_t>(nx) * static_cast<size_t>(ny))
        throw std::invalid_argument("transform: expected " + std::to_string(nx * ny) +
                                    " samples, got " + std::to_string(values.size()));
    Field2D out(grid);
    std::vector<std::complex<double>> row(static_cast<size_t>(nx));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) row[static_cast<size_t>(i)] = values[static_cast<size_t>(i) * ny + j];
        Fft::instance().forward(nx, row.data());
        for (int k = 0; k < nx; ++k) out.slot(k, j) = row[static_cast<size_t>(k)] / double(nx);
    }
    return out;
}

std::vector<double> inverse_transform(const Field2D& f) {
    const int nx = f.nx(), ny = f.ny();
    std::vector<double> values(static_cast<size_t>(nx) * static_cast<size_t>(ny));
    std::vector<std::complex<double>> row(static_cast<size_t>(nx));
    for (int j = 0; j < ny; ++j) {
        for (int k = 0; k < nx; ++k) row[static_cast<size_t>(k)] = f.slot(k, j);
        Fft::instance().backward(nx, row.data());
        for (int i = 0; i < nx; ++i) values[static_cast<size_t>(i) * ny + j] = row[static_cast<size_t>(i)].real();
    }
    return values;
}

Field2D sample(const GridSpec& grid, const std::function<double(double, double)>& f) {
    grid.validate();
    const auto& ops = VerticalOps::get(grid);
    const auto x = grid.x_nodes();
    std::vector<double> values(static_cast<size_t>(grid.nx) * static_cast<size_t>(grid.ny));
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j)
            values[static_cast<size_t>(i) * grid.ny + j] = f(x[static_cast<size_t>(i)], ops.y(j));
    return transform(grid, values);
}

Field2D d_dx(const Field2D& f) {
    const int nx = f.nx(), ny = f.ny();
    Field2D out(f.grid());
    for (int k = 0; k < nx; ++k) {
        const int m = f.grid().mode_of_slot(k);
        if (m == nx / 2) continue;  // Nyquist: no representable odd derivative
        const std::complex<double> factor(0.0, f.grid().xi(m));
        for (int j = 0; j < ny; ++j) out.slot(k, j) = factor * f.slot(k, j);
    }
    return out;
}

Field2D d_dy(const Field2D& f) { return apply_vertical(VerticalOps::get(f.grid()).D, f); }

Field2D d2_dy2(const Field2D& f) { return apply_vertical(VerticalOps::get(f.grid()).D2, f); }

Field2D integral_y_from_0(const Field2D& f) { return apply_vertical(VerticalOps::get(f.grid()).Q, f); }

Profile mean_y(const Field2D& f) {
    const auto& w = VerticalOps::get(f.grid()).w;
    Profile p(f.nx());
    for (int k = 0; k < f.nx(); ++k) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < f.ny(); ++j) acc += w(j) * f.slot(k, j);
        p(k) = acc;
    }
    return p;
}

Profile wall_trace(const Field2D& f, int j) {
    if (j < 0 || j >= f.ny()) throw std::invalid_argument("wall_trace: row out of range");
    Profile p(f.nx());
    for (int k = 0; k < f.nx(); ++k) p(k) = f.slot(k, j);
    return p;
}

Field2D broadcast_y(const GridSpec& grid, const Profile& p) {
    if (p.size() != grid.nx) throw std::invalid_argument("broadcast_y: profile size mismatch");
    Field2D out(grid);
    for (int k = 0; k < grid.nx; ++k)
        for (int j = 0; j < grid.ny; ++j) out.slot(k, j) = p(k);
    return out;
}

Field2D multiply(const Field2D& f, const Field2D& g) {
    require_same_grid(f, g, "multiply");
    const int nx = f.nx(), ny = f.ny();
    const int half = nx / 2;
    int fine = 3 * nx / 2;
    if (fine % 2 != 0) ++fine;

    Field2D out(f.grid());
    std::vector<std::complex<double>> fa(static_cast<size_t>(fine));
    std::vector<std::complex<double>> fb(static_cast<size_t>(fine));

    auto pad = [&](const Field2D& src, int j, std::vector<std::complex<double>>& buf) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        for (int m = -half + 1; m < half; ++m) {
            const int kc = src.grid().slot_of_mode(m);
            buf[static_cast<size_t>(m >= 0 ? m : m + fine)] = src.slot(kc, j);
        }
        // Split the folded cosine evenly across +-nx/2 on the fine grid.
        const std::complex<double> nyq = 0.5 * src.slot(half, j);
        buf[static_cast<size_t>(half)] = nyq;
        buf[static_cast<size_t>(fine - half)] = nyq;
    };

    for (int j = 0; j < ny; ++j) {
        pad(f, j, fa);
        pad(g, j, fb);
        Fft::instance().backward(fine, fa.data());
        Fft::instance().backward(fine, fb.data());
        for (int i = 0; i < fine; ++i) fa[static_cast<size_t>(i)] *= fb[static_cast<size_t>(i)];
        Fft::instance().forward(fine, fa.data());
        const double scale = 1.0 / fine;
        for (int m = -half + 1; m < half; ++m) {
            const int kc = f.grid().slot_of_mode(m);
            out.slot(kc, j) = scale * fa[static_cast<size_t>(m >= 0 ? m : m + fine)];
        }
        // The coarse Nyquist slot holds the fold of the +-nx/2 product modes.
        out.slot(half, j) =
            scale * (fa[static_cast<size_t>(half)] + fa[static_cast<size_t>(fine - half)]);
    }
    return out;
}

double l2_norm(const Field2D& f) {
    const auto& w = VerticalOps::get(f.grid()).w;
    double acc = 0.0;
    for (int k = 0; k < f.nx(); ++k)
        for (int j = 0; j < f.ny(); ++j) acc += w(j) * std::norm(f.slot(k, j));
    return std::sqrt(std::max(acc, 0.0));
}

Eigen::VectorXd mode_l2(const Field2D& f) {
    const auto& w = VerticalOps::get(f.grid()).w;
    Eigen::VectorXd out(f.nx());
    for (int k = 0; k < f.nx(); ++k) {
        double acc = 0.0;
        for (int j = 0; j < f.ny(); ++j) acc += w(j) * std::norm(f.slot(k, j));
        out(k) = std::sqrt(std::max(acc, 0.0));
    }
    return out;
}

double max_abs(const Field2D& f) {
    const auto values = inverse_transform(f);
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, std::abs(v));
    return worst;
}

}  // namespace striplab
