#ifndef FDD_CORE_HPP
#define FDD_CORE_HPP

/**
 * @file core.hpp
 * @brief Grids, functional datasets, depth/rank vectors and the ranking primitive.
 *
 * Curves are represented only by their samples on a shared grid. A dataset with
 * n curves on p grid points is stored as a dense row-major n x p matrix; row i
 * is curve i.
 */

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched lengths or shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Values outside the admissible range of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Malformed dataset or manifest file. Carries the 1-based line and column.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column);
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    /// Message without the position prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string detail_;
};

/// Linear-algebra failure (covariance factorization, rank-deficient fits).
class NumericalError : public Error {
public:
    using Error::Error;
};

using Curve = std::vector<double>;
using CurveView = std::span<const double>;

/// Strictly increasing, finite sample points t_1 < ... < t_p with p >= 2.
class Grid {
public:
    explicit Grid(std::vector<double> points);

    /// {k/count : k = first..first+count-1}.
    static Grid uniform(std::size_t count, std::size_t first = 1);

    std::size_t size() const noexcept { return points_.size(); }
    std::span<const double> points() const noexcept { return points_; }
    double operator[](std::size_t k) const { return points_[k]; }

    /// Trapezoidal quadrature weights on [t_1, t_p].
    std::vector<double> trapezoid_weights() const;

    bool operator==(const Grid&) const = default;

private:
    std::vector<double> points_;
};

/// n curves sampled on a shared grid. Immutable after construction.
class FunctionalDataset {
public:
    /// `values` is row-major n x p; labels default to "c0".."c{n-1}".
    FunctionalDataset(Grid grid, std::vector<double> values,
                      std::vector<std::string> labels = {});

    std::size_t size() const noexcept { return n_; }
    std::size_t points() const noexcept { return grid_.size(); }
    const Grid& grid() const noexcept { return grid_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::span<const double> values() const noexcept { return values_; }

    CurveView curve(std::size_t i) const {
        return {values_.data() + i * grid_.size(), grid_.size()};
    }
    double operator()(std::size_t i, std::size_t k) const {
        return values_[i * grid_.size() + k];
    }

    /// Rows picked by `rows`, in that order.
    FunctionalDataset subset(std::span<const std::size_t> rows) const;

private:
    Grid grid_;
    std::size_t n_;
    std::vector<double> values_;
    std::vector<std::string> labels_;
};

enum class DepthKind { Linf, Band3, ModifiedBand2, HalfRegion, ModifiedHalfRegion, RandomTukey, Spatial };

/// Per-curve depth values with the method that produced them.
struct DepthVector {
    DepthKind method = DepthKind::Linf;
    std::vector<double> values;
    std::optional<std::uint64_t> seed;

    std::size_t size() const noexcept { return values.size(); }
};

/// Ranks 1..n from least deep to deepest.
struct RankVector {
    std::vector<std::size_t> ranks;
    std::uint64_t tie_seed = 0;

    std::size_t size() const noexcept { return ranks.size(); }
};

/// max_k |x_k - y_k|.
double sup_distance(CurveView x, CurveView y);

/// Ranks by increasing depth. Tied depths occupy their block of rank positions
/// in an order drawn from `tie_seed` alone.
RankVector rank_curves(std::span<const double> depth, std::uint64_t tie_seed);
RankVector rank_curves(const DepthVector& depth, std::uint64_t tie_seed);

/// Dataset CSV: header `grid,t1,...,tp`, then one `label,v1,...,vp` row per
/// curve. Lines starting with '#' are comments.
FunctionalDataset load_dataset(const std::string& path);
FunctionalDataset parse_dataset(const std::string& text);
void save_dataset(const FunctionalDataset& ds, const std::string& path,
                  const std::string& comment = {});
std::string format_dataset(const FunctionalDataset& ds, const std::string& comment = {});

/// Round-trip decimal representation (17 significant digits).
std::string format_real(double v);

}  // namespace fdd

#endif  // FDD_CORE_HPP
