#include "fdd/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include "fdd/parallel.hpp"
#include "fdd/rng.hpp"

namespace fdd {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column),
      detail_(what) {}

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw DomainError("grid needs at least 2 points");
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (!std::isfinite(points_[k])) throw DomainError("grid point " + std::to_string(k) + " is not finite");
        if (k > 0 && !(points_[k] > points_[k - 1]))
            throw DomainError("grid is not strictly increasing at point " + std::to_string(k));
    }
}

Grid Grid::uniform(std::size_t count, std::size_t first) {
    std::vector<double> t(count);
    for (std::size_t k = 0; k < count; ++k) t[k] = static_cast<double>(first + k) / static_cast<double>(count);
    return Grid(std::move(t));
}

std::vector<double> Grid::trapezoid_weights() const {
    const std::size_t p = points_.size();
    std::vector<double> w(p, 0.0);
    for (std::size_t k = 0; k + 1 < p; ++k) {
        const double h = points_[k + 1] - points_[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    return w;
}

FunctionalDataset::FunctionalDataset(Grid grid, std::vector<double> values, std::vector<std::string> labels)
    : grid_(std::move(grid)), n_(0), values_(std::move(values)), labels_(std::move(labels)) {
    const std::size_t p = grid_.size();
    if (values_.empty() || values_.size() % p != 0)
        throw DimensionError("dataset values (" + std::to_string(values_.size()) +
                             ") are not a nonempty multiple of the grid size " + std::to_string(p));
    n_ = values_.size() / p;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw DomainError("non-finite value in curve " + std::to_string(i / p) + " at grid index " +
                              std::to_string(i % p));
    }
    if (labels_.empty()) {
        labels_.reserve(n_);
        for (std::size_t i = 0; i < n_; ++i) labels_.push_back("c" + std::to_string(i));
    } else if (labels_.size() != n_) {
        throw DimensionError("expected " + std::to_string(n_) + " labels, got " + std::to_string(labels_.size()));
    }
}

FunctionalDataset FunctionalDataset::subset(std::span<const std::size_t> rows) const {
    const std::size_t p = points();
    std::vector<double> v;
    v.reserve(rows.size() * p);
    std::vector<std::string> labels;
    labels.reserve(rows.size());
    for (auto r : rows) {
        if (r >= n_) throw DimensionError("row " + std::to_string(r) + " out of range");
        auto c = curve(r);
        v.insert(v.end(), c.begin(), c.end());
        labels.push_back(labels_[r]);
    }
    return FunctionalDataset(grid_, std::move(v), std::move(labels));
}

double sup_distance(CurveView x, CurveView y) {
    if (x.size() != y.size())
        throw DimensionError("sup_distance: curve lengths " + std::to_string(x.size()) + " and " +
                             std::to_string(y.size()) + " differ");
    double m = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) m = std::max(m, std::abs(x[k] - y[k]));
    return m;
}

RankVector rank_curves(std::span<const double> depth, std::uint64_t tie_seed) {
    const std::size_t n = depth.size();
    if (n == 0) throw DomainError("rank_curves: empty depth vector");

    // Random secondary key: a seeded permutation of 0..n-1.
    std::vector<std::size_t> key(n);
    std::iota(key.begin(), key.end(), 0);
    Rng rng(derive_seed(tie_seed, {0x7469655FULL}));
    std::shuffle(key.begin(), key.end(), rng);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (depth[a] != depth[b]) return depth[a] < depth[b];
        return key[a] < key[b];
    });

    RankVector out;
    out.tie_seed = tie_seed;
    out.ranks.resize(n);
    for (std::size_t r = 0; r < n; ++r) out.ranks[order[r]] = r + 1;
    return out;
}

RankVector rank_curves(const DepthVector& depth, std::uint64_t tie_seed) {
    return rank_curves(std::span<const double>(depth.values), tie_seed);
}

unsigned default_threads() {
    if (const char* env = std::getenv("FDD_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace fdd
