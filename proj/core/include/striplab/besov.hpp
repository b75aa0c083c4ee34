#pragma once

#include <optional>
#include <vector>

#include "striplab/cutoff.hpp"
#include "striplab/field.hpp"

namespace striplab {

/// Per-block breakdown of a horizontal Besov norm
/// ||f||_{B^s} = sum_q 2^{qs} ||Delta_q f||_{L2}.
struct BesovReport {
    double s = 0.0;
    DyadicRange range;
    std::vector<double> per_block;  ///< 2^{qs} ||Delta_q f||, q = q_min..q_max
    double total = 0.0;
};

/// Exponent must lie in [-2, 6] (outside the calibrated range -> error).
/// The x-mean column carries no dyadic weight and is ignored, matching the
/// homogeneous decomposition.
BesovReport besov_report(const Field2D& f, double s);
double besov_norm(const Field2D& f, double s);

/// Besov norm of a pair, measured block-wise as
/// sum_q 2^{qs} * sqrt(||Delta_q f||^2 + ||Delta_q g||^2).
double besov_norm_pair(const Field2D& f, const Field2D& g, double s);

/// How a Chemin-Lerner accumulator aggregates block norms over time.
enum class TimeAggregate {
    SupInTime,       ///< running sup_t of each block norm
    L2InTime,        ///< sqrt of int ||.||^2 dt per block
    WeightedL2InTime ///< sqrt of int delta(t) ||.||^2 dt per block
};

/// Time-integrated Besov bookkeeping with the l1 sum over blocks taken
/// outside the time norm. Feed one sample per time slab via update(); the
/// slab is [t, t+dt) and samples must arrive in order.
class CheminLernerAccumulator {
public:
    CheminLernerAccumulator(double s, TimeAggregate agg, const GridSpec& grid);

    /// Single-field sample. weight is the clock rate delta(t) and is only
    /// consulted by WeightedL2InTime accumulators. A dt = 0 sample is a
    /// sup-only touch: it refreshes SupInTime aggregates and adds nothing to
    /// the integral kinds (used to fold the final state of a run in).
    void update(const Field2D& f, double t, double dt, double weight = 1.0);

    /// Pair sample: block norms are sqrt(||Delta_q f||^2 + ||Delta_q g||^2).
    void update(const Field2D& f, const Field2D& g, double t, double dt, double weight = 1.0);

    /// Current value of the accumulated norm (l1 over blocks).
    double total() const;

    /// Per-block aggregates, weighted by 2^{qs}, q = q_min..q_max.
    std::vector<double> per_block() const;

    double s() const { return s_; }
    TimeAggregate aggregate() const { return agg_; }
    const DyadicRange& range() const { return range_; }

private:
    void fold(const std::vector<double>& block_norms, double t, double dt, double weight);

    double s_;
    TimeAggregate agg_;
    GridSpec grid_;
    DyadicRange range_;
    std::vector<double> acc_;  ///< sup or integral per block (unweighted by 2^{qs})
    std::optional<double> last_end_;
};

/// Paraproduct split of a dealiased product: multiply(f, g) = Tfg + Tgf + R
/// exactly (to roundoff) for fields inside the covered band. Tfg collects
/// low(f) x block(g) interactions, Tgf the mirror, and R the near-diagonal
/// block pairs together with the sub-range low-frequency interactions.
struct BonyParts {
    Field2D Tfg;
    Field2D Tgf;
    Field2D R;
};

/// Throws std::domain_error naming the missing blocks when either field has
/// content above the covered band, where the truncated ladder cannot
/// reproduce the product.
BonyParts bony_decompose(const Field2D& f, const Field2D& g);

}  // namespace striplab
