#ifndef FDD_DEPTHS_HPP
#define FDD_DEPTHS_HPP

/**
 * @file depths.hpp
 * @brief Empirical functional depths.
 *
 * Every depth is available in two forms:
 *   - query vs reference: each query curve is scored against the empirical
 *     distribution of the reference sample (bands/regions are formed by
 *     reference curves only);
 *   - in-sample: the dataset is scored against itself, which is the
 *     query-vs-reference form with query == reference. A curve therefore
 *     always belongs to its own reference sample.
 *
 * Pointwise comparisons are non-strict (<=, >=). Inner products and L2 norms
 * over the grid are accumulated in a canonical (sorted) order so that
 * reordering the grid columns leaves every value bit-identical.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "fdd/core.hpp"

namespace fdd {

enum class Quadrature {
    Trapezoid,  ///< trapezoidal weights on the grid
    Uniform,    ///< unit weight at every grid point
};

enum class ProjectionFamily {
    Gaussian,  ///< i.i.d. N(0,1) per grid point
    Brownian,  ///< standard Brownian motion sampled on the grid
};

struct DepthMethod {
    DepthKind kind = DepthKind::Linf;
    std::size_t n_proj = 250;
    std::uint64_t seed = 0;
    Quadrature quadrature = Quadrature::Trapezoid;
    ProjectionFamily directions = ProjectionFamily::Gaussian;
};

/// Short CLI token: linf, bd, mbd, hrd, mhrd, rtd, spatd.
std::string to_string(DepthKind kind);
/// Display name used in report tables (L∞D is written LINFD).
std::string display_name(DepthKind kind);
/// Inverse of to_string; throws DomainError on an unknown token.
DepthKind parse_depth_kind(const std::string& token);

std::vector<double> quadrature_weights(const Grid& grid, Quadrature rule);

/// (1 + mean_j ||x - X_j||_inf)^-1.
DepthVector linf_depth(const FunctionalDataset& query, const FunctionalDataset& reference, unsigned threads = 1);
DepthVector linf_depth(const FunctionalDataset& ds, unsigned threads = 1);

/// Band depth with J = 3, unnormalized: sum over j = 2, 3 of the fraction of
/// reference j-subsets whose band contains the curve at every grid point.
/// Values lie in [0, 2]. Requires at least 3 reference curves.
DepthVector band_depth_j3(const FunctionalDataset& query, const FunctionalDataset& reference, unsigned threads = 1);
DepthVector band_depth_j3(const FunctionalDataset& ds, unsigned threads = 1);

/// Modified band depth with J = 2 by direct enumeration of pairs, O(n^2 p) per curve.
DepthVector mbd_naive(const FunctionalDataset& query, const FunctionalDataset& reference);
DepthVector mbd_naive(const FunctionalDataset& ds);

/// Modified band depth with J = 2 from per-grid-point order statistics,
/// O(n p log n). At each grid point the pairs whose band misses x are exactly
/// those lying strictly below or strictly above it, so the count is exact under ties.
DepthVector mbd_fast(const FunctionalDataset& query, const FunctionalDataset& reference);
DepthVector mbd_fast(const FunctionalDataset& ds);

/// min of the fractions of reference curves lying below / above x everywhere.
DepthVector half_region_depth(const FunctionalDataset& query, const FunctionalDataset& reference,
                              unsigned threads = 1);
DepthVector half_region_depth(const FunctionalDataset& ds, unsigned threads = 1);

/// min of the grid-averaged fractions of reference curves below / above x.
DepthVector modified_half_region_depth(const FunctionalDataset& query, const FunctionalDataset& reference);
DepthVector modified_half_region_depth(const FunctionalDataset& ds);

/// Projection directions, one row of length p per direction.
struct Projections {
    std::size_t count = 0;
    std::size_t points = 0;
    std::vector<double> directions;

    std::span<const double> direction(std::size_t k) const { return {directions.data() + k * points, points}; }
};

/// Draws `count` directions from `family`, each coordinate scaled by the
/// quadrature weight of its grid point. Deterministic in `seed`.
Projections draw_projections(const Grid& grid, std::size_t count, std::uint64_t seed,
                             ProjectionFamily family = ProjectionFamily::Gaussian,
                             Quadrature rule = Quadrature::Trapezoid);

/// min over directions of the univariate Tukey depth of <v, x>.
DepthVector random_tukey_depth(const FunctionalDataset& query, const FunctionalDataset& reference,
                               const Projections& projections, unsigned threads = 1);
DepthVector random_tukey_depth(const FunctionalDataset& ds, std::size_t n_proj, std::uint64_t seed,
                               unsigned threads = 1);

/// 1 - || n^-1 sum_j (x - X_j) / ||x - X_j|| ||, L2 norm with the given
/// quadrature weights. Reference curves equal to x contribute zero.
DepthVector spatial_depth(const FunctionalDataset& query, const FunctionalDataset& reference,
                          Quadrature rule = Quadrature::Trapezoid, unsigned threads = 1);
DepthVector spatial_depth(const FunctionalDataset& ds, Quadrature rule = Quadrature::Trapezoid,
                          unsigned threads = 1);

/// Dispatch on method.kind. MBD uses the fast algorithm.
DepthVector compute_depth(const FunctionalDataset& query, const FunctionalDataset& reference,
                          const DepthMethod& method, unsigned threads = 1);
DepthVector compute_depth(const FunctionalDataset& ds, const DepthMethod& method, unsigned threads = 1);

}  // namespace fdd

#endif  // FDD_DEPTHS_HPP
