#include "fdd/depths.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdd/parallel.hpp"
#include "fdd/rng.hpp"

namespace fdd {

namespace {

void require_same_grid(const FunctionalDataset& query, const FunctionalDataset& reference) {
    if (query.points() != reference.points())
        throw DimensionError("query has " + std::to_string(query.points()) + " grid points, reference has " +
                             std::to_string(reference.points()));
}

// Sum in ascending order so the result depends only on the multiset of terms.
double canonical_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

DepthVector make_result(DepthKind kind, std::size_t n) {
    DepthVector d;
    d.method = kind;
    d.values.assign(n, 0.0);
    return d;
}

// Column k of the dataset, sorted ascending.
std::vector<std::vector<double>> sorted_columns(const FunctionalDataset& ds) {
    std::vector<std::vector<double>> cols(ds.points(), std::vector<double>(ds.size()));
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < ds.points(); ++k) cols[k][i] = ds(i, k);
    for (auto& c : cols) std::sort(c.begin(), c.end());
    return cols;
}

}  // namespace

std::string to_string(DepthKind kind) {
    switch (kind) {
        case DepthKind::Linf: return "linf";
        case DepthKind::Band3: return "bd";
        case DepthKind::ModifiedBand2: return "mbd";
        case DepthKind::HalfRegion: return "hrd";
        case DepthKind::ModifiedHalfRegion: return "mhrd";
        case DepthKind::RandomTukey: return "rtd";
        case DepthKind::Spatial: return "spatd";
    }
    return "?";
}

std::string display_name(DepthKind kind) {
    switch (kind) {
        case DepthKind::Linf: return "LINFD";
        case DepthKind::Band3: return "BD";
        case DepthKind::ModifiedBand2: return "MBD";
        case DepthKind::HalfRegion: return "HRD";
        case DepthKind::ModifiedHalfRegion: return "MHRD";
        case DepthKind::RandomTukey: return "RTD";
        case DepthKind::Spatial: return "SPATD";
    }
    return "?";
}

DepthKind parse_depth_kind(const std::string& token) {
    std::string t = token;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "linf" || t == "linfd") return DepthKind::Linf;
    if (t == "bd" || t == "bd3") return DepthKind::Band3;
    if (t == "mbd" || t == "mbd2") return DepthKind::ModifiedBand2;
    if (t == "hrd") return DepthKind::HalfRegion;
    if (t == "mhrd") return DepthKind::ModifiedHalfRegion;
    if (t == "rtd") return DepthKind::RandomTukey;
    if (t == "spatd" || t == "spatial") return DepthKind::Spatial;
    throw DomainError("unknown depth method '" + token + "'");
}

std::vector<double> quadrature_weights(const Grid& grid, Quadrature rule) {
    if (rule == Quadrature::Uniform) return std::vector<double>(grid.size(), 1.0);
    return grid.trapezoid_weights();
}

// ---------------------------------------------------------------- L-infinity

DepthVector linf_depth(const FunctionalDataset& query, const FunctionalDataset& reference, unsigned threads) {
    require_same_grid(query, reference);
    auto out = make_result(DepthKind::Linf, query.size());
    const double n = static_cast<double>(reference.size());
    parallel_for(query.size(), threads, [&](std::size_t i) {
        const auto x = query.curve(i);
        double total = 0.0;
        for (std::size_t j = 0; j < reference.size(); ++j) total += sup_distance(x, reference.curve(j));
        out.values[i] = 1.0 / (1.0 + total / n);
    });
    return out;
}

DepthVector linf_depth(const FunctionalDataset& ds, unsigned threads) { return linf_depth(ds, ds, threads); }

// ------------------------------------------------------------- modified band

DepthVector mbd_naive(const FunctionalDataset& query, const FunctionalDataset& reference) {
    require_same_grid(query, reference);
    const std::size_t n = reference.size();
    const std::size_t p = reference.points();
    if (n < 2) throw DomainError("modified band depth needs at least 2 reference curves");
    auto out = make_result(DepthKind::ModifiedBand2, query.size());
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < query.size(); ++i) {
        const auto x = query.curve(i);
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto a = reference.curve(j);
            for (std::size_t k = j + 1; k < n; ++k) {
                const auto b = reference.curve(k);
                std::size_t inside = 0;
                for (std::size_t t = 0; t < p; ++t)
                    if (std::min(a[t], b[t]) <= x[t] && x[t] <= std::max(a[t], b[t])) ++inside;
                total += static_cast<double>(inside) / static_cast<double>(p);
            }
        }
        out.values[i] = total / pairs;
    }
    return out;
}

DepthVector mbd_naive(const FunctionalDataset& ds) { return mbd_naive(ds, ds); }

DepthVector mbd_fast(const FunctionalDataset& query, const FunctionalDataset& reference) {
    require_same_grid(query, reference);
    const std::size_t n = reference.size();
    const std::size_t p = reference.points();
    if (n < 2) throw DomainError("modified band depth needs at least 2 reference curves");
    const auto cols = sorted_columns(reference);
    const auto choose2 = [](std::uint64_t m) { return m < 2 ? 0 : m * (m - 1) / 2; };
    const std::uint64_t pairs = choose2(n);

    auto out = make_result(DepthKind::ModifiedBand2, query.size());
    std::vector<std::uint64_t> inside(query.size(), 0);
    for (std::size_t t = 0; t < p; ++t) {
        const auto& col = cols[t];
        for (std::size_t i = 0; i < query.size(); ++i) {
            const double v = query(i, t);
            const auto below = static_cast<std::uint64_t>(std::lower_bound(col.begin(), col.end(), v) - col.begin());
            const auto above = static_cast<std::uint64_t>(col.end() - std::upper_bound(col.begin(), col.end(), v));
            inside[i] += pairs - choose2(below) - choose2(above);
        }
    }
    const double denom = static_cast<double>(pairs) * static_cast<double>(p);
    for (std::size_t i = 0; i < query.size(); ++i) out.values[i] = static_cast<double>(inside[i]) / denom;
    return out;
}

DepthVector mbd_fast(const FunctionalDataset& ds) { return mbd_fast(ds, ds); }

// --------------------------------------------------------------- half region

DepthVector half_region_depth(const FunctionalDataset& query, const FunctionalDataset& reference,
                              unsigned threads) {
    require_same_grid(query, reference);
    const std::size_t p = reference.points();
    auto out = make_result(DepthKind::HalfRegion, query.size());
    const double n = static_cast<double>(reference.size());
    parallel_for(query.size(), threads, [&](std::size_t i) {
        const auto x = query.curve(i);
        std::size_t below = 0, above = 0;
        for (std::size_t j = 0; j < reference.size(); ++j) {
            const auto y = reference.curve(j);
            bool all_le = true, all_ge = true;
            for (std::size_t t = 0; t < p && (all_le || all_ge); ++t) {
                all_le = all_le && y[t] <= x[t];
                all_ge = all_ge && y[t] >= x[t];
            }
            below += all_le;
            above += all_ge;
        }
        out.values[i] = static_cast<double>(std::min(below, above)) / n;
    });
    return out;
}

DepthVector half_region_depth(const FunctionalDataset& ds, unsigned threads) {
    return half_region_depth(ds, ds, threads);
}

DepthVector modified_half_region_depth(const FunctionalDataset& query, const FunctionalDataset& reference) {
    require_same_grid(query, reference);
    const std::size_t p = reference.points();
    const auto cols = sorted_columns(reference);
    auto out = make_result(DepthKind::ModifiedHalfRegion, query.size());
    std::vector<std::uint64_t> le(query.size(), 0), ge(query.size(), 0);
    for (std::size_t t = 0; t < p; ++t) {
        const auto& col = cols[t];
        for (std::size_t i = 0; i < query.size(); ++i) {
            const double v = query(i, t);
            le[i] += static_cast<std::uint64_t>(std::upper_bound(col.begin(), col.end(), v) - col.begin());
            ge[i] += static_cast<std::uint64_t>(col.end() - std::lower_bound(col.begin(), col.end(), v));
        }
    }
    const double denom = static_cast<double>(reference.size()) * static_cast<double>(p);
    for (std::size_t i = 0; i < query.size(); ++i)
        out.values[i] = static_cast<double>(std::min(le[i], ge[i])) / denom;
    return out;
}

DepthVector modified_half_region_depth(const FunctionalDataset& ds) { return modified_half_region_depth(ds, ds); }

// --------------------------------------------------------------- random Tukey

Projections draw_projections(const Grid& grid, std::size_t count, std::uint64_t seed, ProjectionFamily family,
                             Quadrature rule) {
    if (count == 0) throw DomainError("random Tukey depth needs at least one projection");
    const std::size_t p = grid.size();
    const auto w = quadrature_weights(grid, rule);
    Projections proj;
    proj.count = count;
    proj.points = p;
    proj.directions.resize(count * p);
    for (std::size_t d = 0; d < count; ++d) {
        Rng rng = make_rng(seed, {0x525444ULL, d});
        std::normal_distribution<double> normal;
        double level = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            double v = normal(rng);
            if (family == ProjectionFamily::Brownian) {
                const double dt = k == 0 ? grid[0] - 0.0 : grid[k] - grid[k - 1];
                level += v * std::sqrt(std::max(dt, 0.0));
                v = level;
            }
            proj.directions[d * p + k] = v * w[k];
        }
    }
    return proj;
}

DepthVector random_tukey_depth(const FunctionalDataset& query, const FunctionalDataset& reference,
                               const Projections& projections, unsigned threads) {
    require_same_grid(query, reference);
    if (projections.points != reference.points())
        throw DimensionError("projection length does not match the grid");
    if (projections.count == 0) throw DomainError("random Tukey depth needs at least one projection");
    const std::size_t p = reference.points();
    const std::size_t n = reference.size();
    auto out = make_result(DepthKind::RandomTukey, query.size());
    std::vector<std::size_t> min_count(query.size(), n);

    // Per direction: grid indices ordered by direction value, so every inner
    // product is accumulated in an order fixed by the direction alone.
    std::vector<std::vector<double>> ref_proj(projections.count, std::vector<double>(n));
    std::vector<std::vector<double>> query_proj(projections.count, std::vector<double>(query.size()));
    parallel_for(projections.count, threads, [&](std::size_t d) {
        const auto v = projections.direction(d);
        std::vector<std::size_t> order(p);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        const auto dot = [&](CurveView x) {
            double s = 0.0;
            for (auto k : order) s += v[k] * x[k];
            return s;
        };
        for (std::size_t j = 0; j < n; ++j) ref_proj[d][j] = dot(reference.curve(j));
        for (std::size_t i = 0; i < query.size(); ++i) query_proj[d][i] = dot(query.curve(i));
        std::sort(ref_proj[d].begin(), ref_proj[d].end());
    });
    for (std::size_t d = 0; d < projections.count; ++d) {
        const auto& sorted = ref_proj[d];
        for (std::size_t i = 0; i < query.size(); ++i) {
            const double z = query_proj[d][i];
            const auto le = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), z) - sorted.begin());
            const auto ge = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), z));
            min_count[i] = std::min(min_count[i], std::min(le, ge));
        }
    }
    for (std::size_t i = 0; i < query.size(); ++i)
        out.values[i] = static_cast<double>(min_count[i]) / static_cast<double>(n);
    return out;
}

DepthVector random_tukey_depth(const FunctionalDataset& ds, std::size_t n_proj, std::uint64_t seed,
                               unsigned threads) {
    auto out = random_tukey_depth(ds, ds, draw_projections(ds.grid(), n_proj, seed), threads);
    out.seed = seed;
    return out;
}

// -------------------------------------------------------------------- spatial

DepthVector spatial_depth(const FunctionalDataset& query, const FunctionalDataset& reference, Quadrature rule,
                          unsigned threads) {
    require_same_grid(query, reference);
    const std::size_t p = reference.points();
    const auto w = quadrature_weights(reference.grid(), rule);
    auto out = make_result(DepthKind::Spatial, query.size());
    const double n = static_cast<double>(reference.size());
    parallel_for(query.size(), threads, [&](std::size_t i) {
        const auto x = query.curve(i);
        std::vector<double> mean_dir(p, 0.0), diff(p), terms(p);
        for (std::size_t j = 0; j < reference.size(); ++j) {
            const auto y = reference.curve(j);
            for (std::size_t t = 0; t < p; ++t) {
                diff[t] = x[t] - y[t];
                terms[t] = w[t] * diff[t] * diff[t];
            }
            const double norm = std::sqrt(canonical_sum(terms));
            if (norm == 0.0) continue;
            for (std::size_t t = 0; t < p; ++t) mean_dir[t] += diff[t] / norm;
        }
        for (std::size_t t = 0; t < p; ++t) {
            mean_dir[t] /= n;
            terms[t] = w[t] * mean_dir[t] * mean_dir[t];
        }
        out.values[i] = std::max(0.0, 1.0 - std::sqrt(canonical_sum(terms)));
    });
    return out;
}

DepthVector spatial_depth(const FunctionalDataset& ds, Quadrature rule, unsigned threads) {
    return spatial_depth(ds, ds, rule, threads);
}

// ------------------------------------------------------------------- dispatch

DepthVector compute_depth(const FunctionalDataset& query, const FunctionalDataset& reference,
                          const DepthMethod& method, unsigned threads) {
    DepthVector out;
    switch (method.kind) {
        case DepthKind::Linf: out = linf_depth(query, reference, threads); break;
        case DepthKind::Band3: out = band_depth_j3(query, reference, threads); break;
        case DepthKind::ModifiedBand2: out = mbd_fast(query, reference); break;
        case DepthKind::HalfRegion: out = half_region_depth(query, reference, threads); break;
        case DepthKind::ModifiedHalfRegion: out = modified_half_region_depth(query, reference); break;
        case DepthKind::RandomTukey: {
            const auto proj = draw_projections(reference.grid(), method.n_proj, method.seed, method.directions,
                                               method.quadrature);
            out = random_tukey_depth(query, reference, proj, threads);
            out.seed = method.seed;
            break;
        }
        case DepthKind::Spatial: out = spatial_depth(query, reference, method.quadrature, threads); break;
    }
    return out;
}

DepthVector compute_depth(const FunctionalDataset& ds, const DepthMethod& method, unsigned threads) {
    return compute_depth(ds, ds, method, threads);
}

}  // namespace fdd
