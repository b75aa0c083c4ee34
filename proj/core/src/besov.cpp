#include "striplab/besov.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "striplab/spectral.hpp"

namespace striplab {

namespace {

void check_exponent(double s) {
    if (!(s >= -2.0 && s <= 6.0))
        throw std::invalid_argument("besov: exponent s = " + std::to_string(s) +
                                    " outside supported range [-2, 6]");
}

std::vector<double> block_l2(const Field2D& f, const DyadicRange& range) {
    std::vector<double> norms;
    norms.reserve(static_cast<size_t>(range.count()));
    for (int q = range.q_min; q <= range.q_max; ++q)
        norms.push_back(l2_norm(dyadic_project(f, q)));
    return norms;
}

}  // namespace

BesovReport besov_report(const Field2D& f, double s) {
    check_exponent(s);
    BesovReport rep;
    rep.s = s;
    rep.range = resolvable_range(f.grid());
    const auto norms = block_l2(f, rep.range);
    rep.per_block.reserve(norms.size());
    for (int q = rep.range.q_min; q <= rep.range.q_max; ++q) {
        const double v = std::exp2(q * s) * norms[static_cast<size_t>(q - rep.range.q_min)];
        rep.per_block.push_back(v);
        rep.total += v;
    }
    return rep;
}

double besov_norm(const Field2D& f, double s) { return besov_report(f, s).total; }

double besov_norm_pair(const Field2D& f, const Field2D& g, double s) {
    check_exponent(s);
    if (!(f.grid() == g.grid()))
        throw std::invalid_argument("besov_norm_pair: fields live on different grids");
    const DyadicRange range = resolvable_range(f.grid());
    const auto nf = block_l2(f, range);
    const auto ng = block_l2(g, range);
    double total = 0.0;
    for (int q = range.q_min; q <= range.q_max; ++q) {
        const size_t i = static_cast<size_t>(q - range.q_min);
        total += std::exp2(q * s) * std::hypot(nf[i], ng[i]);
    }
    return total;
}

CheminLernerAccumulator::CheminLernerAccumulator(double s, TimeAggregate agg, const GridSpec& grid)
    : s_(s), agg_(agg), grid_(grid), range_(resolvable_range(grid)) {
    check_exponent(s);
    acc_.assign(static_cast<size_t>(range_.count()), 0.0);
}

void CheminLernerAccumulator::fold(const std::vector<double>& block_norms, double t, double dt,
                                   double weight) {
    if (!(dt >= 0.0)) throw std::invalid_argument("CheminLernerAccumulator: dt must be nonnegative");
    if (last_end_ && t < *last_end_ - 1e-9 * std::max(1.0, std::abs(*last_end_)))
        throw std::invalid_argument("CheminLernerAccumulator: sample at t = " + std::to_string(t) +
                                    " precedes the previous slab end " + std::to_string(*last_end_));
    if (agg_ == TimeAggregate::WeightedL2InTime && !(weight >= 0.0))
        throw std::invalid_argument("CheminLernerAccumulator: clock weight must be nonnegative");
    for (size_t i = 0; i < acc_.size(); ++i) {
        switch (agg_) {
            case TimeAggregate::SupInTime:
                acc_[i] = std::max(acc_[i], block_norms[i]);
                break;
            case TimeAggregate::L2InTime:
                acc_[i] += dt * block_norms[i] * block_norms[i];
                break;
            case TimeAggregate::WeightedL2InTime:
                acc_[i] += dt * weight * block_norms[i] * block_norms[i];
                break;
        }
    }
    last_end_ = t + dt;
}

void CheminLernerAccumulator::update(const Field2D& f, double t, double dt, double weight) {
    if (!(f.grid() == grid_))
        throw std::invalid_argument("CheminLernerAccumulator: field grid mismatch");
    fold(block_l2(f, range_), t, dt, weight);
}

void CheminLernerAccumulator::update(const Field2D& f, const Field2D& g, double t, double dt,
                                     double weight) {
    if (!(f.grid() == grid_) || !(g.grid() == grid_))
        throw std::invalid_argument("CheminLernerAccumulator: field grid mismatch");
    const auto nf = block_l2(f, range_);
    const auto ng = block_l2(g, range_);
    std::vector<double> joint(nf.size());
    for (size_t i = 0; i < nf.size(); ++i) joint[i] = std::hypot(nf[i], ng[i]);
    fold(joint, t, dt, weight);
}

std::vector<double> CheminLernerAccumulator::per_block() const {
    std::vector<double> out(acc_.size());
    for (int q = range_.q_min; q <= range_.q_max; ++q) {
        const size_t i = static_cast<size_t>(q - range_.q_min);
        const double base = agg_ == TimeAggregate::SupInTime ? acc_[i] : std::sqrt(acc_[i]);
        out[i] = std::exp2(q * s_) * base;
    }
    return out;
}

double CheminLernerAccumulator::total() const {
    double sum = 0.0;
    for (double v : per_block()) sum += v;
    return sum;
}

namespace {

/// Highest block index whose annulus meets |xi|.
int top_block_of(double axi) {
    return static_cast<int>(std::floor(std::log2(axi / 0.75) + 1e-12));
}

void require_covered(const Field2D& f, const char* which) {
    const GridSpec& grid = f.grid();
    const double cover = covered_xi(grid);
    const Eigen::VectorXd per_mode = mode_l2(f);
    const double scale = std::max(per_mode.maxCoeff(), 1e-300);
    double worst_xi = 0.0;
    for (int k = 0; k < grid.nx; ++k) {
        const double axi = std::abs(grid.xi(grid.mode_of_slot(k)));
        if (axi <= cover) continue;
        if (per_mode(k) > 1e-13 * scale) worst_xi = std::max(worst_xi, axi);
    }
    if (worst_xi > 0.0) {
        const DyadicRange range = resolvable_range(grid);
        throw std::domain_error(
            std::string("bony_decompose: ") + which + " has content at |xi| = " +
            std::to_string(worst_xi) + " above the covered band " + std::to_string(cover) +
            "; blocks q = " + std::to_string(range.q_max + 1) + ".." +
            std::to_string(top_block_of(worst_xi)) + " are missing from the resolvable range");
    }
}

}  // namespace

BonyParts bony_decompose(const Field2D& f, const Field2D& g) {
    if (!(f.grid() == g.grid()))
        throw std::invalid_argument("bony_decompose: fields live on different grids");
    require_covered(f, "first field");
    require_covered(g, "second field");

    const DyadicRange range = resolvable_range(f.grid());
    BonyParts parts{Field2D(f.grid()), Field2D(f.grid()), Field2D(f.grid())};

    for (int q = range.q_min; q <= range.q_max; ++q) {
        const Field2D bg = dyadic_project(g, q);
        const Field2D bf = dyadic_project(f, q);
        parts.Tfg += multiply(low_pass(f, q - 1), bg);
        parts.Tgf += multiply(low_pass(g, q - 1), bf);
        // One-neighbor widening as a difference of low-passes:
        // S_{q+2} - S_{q-1} = Delta_{q-1} + Delta_q + Delta_{q+1}.
        parts.R += multiply(low_pass(f, q + 2) - low_pass(f, q - 1), bg);
    }

    // Interactions entirely below the block range: both factors inside the
    // bottom low-passes. Counting frequencies pairwise, the part of the
    // product missed by the three sums above is exactly
    //   S_{m+1}f * S_m g - S_{m+1}f * S_{m-1}g + S_m f * S_{m-1}g,
    // with m = q_min; it joins the remainder as its bottom rung.
    const int m = range.q_min;
    parts.R += multiply(low_pass(f, m + 1), low_pass(g, m));
    parts.R -= multiply(low_pass(f, m + 1), low_pass(g, m - 1));
    parts.R += multiply(low_pass(f, m), low_pass(g, m - 1));
    return parts;
}

}  // namespace striplab
