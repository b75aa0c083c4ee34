#include "striplab/catalog.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "striplab/cutoff.hpp"
#include "striplab/spectral.hpp"

namespace striplab {

const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names = {"zero", "gauss-sine", "cos-mode",
                                                   "random-band"};
    return names;
}

namespace {

Field2D gauss_sine(const GridSpec& grid, const CatalogRequest& req) {
    const double sigma = req.sigma > 0.0 ? req.sigma : grid.Lx / 8.0;
    const double x0 = 0.5 * grid.Lx;
    Field2D f = sample(grid, [&](double x, double y) {
        double g = 0.0;
        for (int k = -4; k <= 4; ++k) {
            const double d = x - x0 + k * grid.Lx;
            g += std::exp(-0.5 * d * d / (sigma * sigma));
        }
        return req.amplitude * g * std::sin(2.0 * M_PI * y);
    });
    // Remove the x-mean and the negligible tail above the covered band, so
    // the datum is exactly reproducible by the dyadic ladder.
    const double xi_cov = covered_xi(grid);
    for (int k = 0; k < grid.nx; ++k) {
        const double axi = std::abs(grid.xi(grid.mode_of_slot(k)));
        if (axi == 0.0 || axi > xi_cov)
            for (int j = 0; j < grid.ny; ++j) f.slot(k, j) = 0.0;
    }
    f.symmetrize();
    return f;
}

Field2D cos_mode(const GridSpec& grid, const CatalogRequest& req) {
    if (req.mode < 1 || req.mode >= grid.nx / 2)
        throw std::invalid_argument("catalog cos-mode: mode must lie in [1, nx/2), got " +
                                    std::to_string(req.mode));
    if (req.vertical_mode < 2 || req.vertical_mode % 2 != 0)
        throw std::invalid_argument(
            "catalog cos-mode: vertical_mode must be a positive even integer (odd sin(n pi y) "
            "profiles carry a nonzero vertical mean, which the strip data may not)");
    const VerticalOps& ops = VerticalOps::get(grid);
    Field2D f(grid);
    const int kp = grid.slot_of_mode(req.mode);
    const int km = grid.slot_of_mode(-req.mode);
    for (int j = 0; j < grid.ny; ++j) {
        const double p = 0.5 * req.amplitude * std::sin(req.vertical_mode * M_PI * ops.y(j));
        f.slot(kp, j) = p;
        f.slot(km, j) = p;
    }
    return f;
}

Field2D random_band(const GridSpec& grid, const CatalogRequest& req, std::mt19937_64& rng) {
    const int top = std::min(req.max_mode, grid.nx / 2 - 1);
    if (top < 1)
        throw std::invalid_argument("catalog random-band: no modes available below Nyquist");
    const VerticalOps& ops = VerticalOps::get(grid);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Field2D f(grid);
    for (int m = 1; m <= top; ++m) {
        const double decay = std::exp(-m / 4.0);
        const int kp = grid.slot_of_mode(m);
        const int km = grid.slot_of_mode(-m);
        // Even vertical modes only: they vanish at the walls and carry zero
        // vertical mean, keeping the datum compatibility-ready.
        for (int jv = 2; jv <= 8; jv += 2) {
            const std::complex<double> c(unit(rng), unit(rng));
            for (int j = 0; j < grid.ny; ++j) {
                const double p = std::sin(jv * M_PI * ops.y(j));
                f.slot(kp, j) += req.amplitude * decay * c * p;
                f.slot(km, j) += req.amplitude * decay * std::conj(c) * p;
            }
        }
    }
    return f;
}

}  // namespace

InitialData make_datum(const GridSpec& grid, const CatalogRequest& req) {
    grid.validate();
    if (!(req.amplitude >= 0.0) || !std::isfinite(req.amplitude))
        throw std::invalid_argument("catalog: amplitude must be finite and nonnegative");
    InitialData data{Field2D(grid), Field2D(grid)};
    if (req.name == "zero") {
        return data;
    } else if (req.name == "gauss-sine") {
        data.u0 = gauss_sine(grid, req);
    } else if (req.name == "cos-mode") {
        data.u0 = cos_mode(grid, req);
    } else if (req.name == "random-band") {
        std::mt19937_64 rng(req.seed);
        data.u0 = random_band(grid, req, rng);
        data.u1 = random_band(grid, req, rng);
    } else {
        std::string known;
        for (const auto& n : catalog_names()) known += (known.empty() ? "" : ", ") + n;
        throw std::invalid_argument("catalog: unknown datum '" + req.name + "' (known: " + known +
                                    ")");
    }
    return data;
}

}  // namespace striplab
