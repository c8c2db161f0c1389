#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fdd/depths.hpp"
#include "fdd/gp_sim.hpp"
#include "oracles.hpp"

using namespace fdd;
using oracle::max_abs_diff;

namespace {

FunctionalDataset permute_columns(const FunctionalDataset& ds, const std::vector<std::size_t>& perm) {
    std::vector<double> v(ds.size() * ds.points());
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < ds.points(); ++k) v[i * ds.points() + k] = ds(i, perm[k]);
    return FunctionalDataset(ds.grid(), std::move(v), ds.labels());
}

FunctionalDataset transform(const FunctionalDataset& ds, double scale, const std::vector<double>& shift) {
    std::vector<double> v(ds.values().begin(), ds.values().end());
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < ds.points(); ++k) v[i * ds.points() + k] = scale * v[i * ds.points() + k] + shift[k];
    return FunctionalDataset(ds.grid(), std::move(v));
}

FunctionalDataset one_curve(const Grid& g, std::vector<double> v) { return FunctionalDataset(g, std::move(v)); }

}  // namespace

TEST_CASE("depth method tokens") {
    for (auto k : {DepthKind::Linf, DepthKind::Band3, DepthKind::ModifiedBand2, DepthKind::HalfRegion,
                   DepthKind::ModifiedHalfRegion, DepthKind::RandomTukey, DepthKind::Spatial})
        CHECK(parse_depth_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_depth_kind("bogus"), DomainError);
    CHECK(display_name(DepthKind::Linf) == "LINFD");
}

TEST_CASE("L-infinity depth") {
    CHECK(linf_depth(oracle::constants({3.0})).values == std::vector<double>{1.0});
    CHECK(linf_depth(oracle::constants({0.0, 2.0})).values == std::vector<double>{0.5, 0.5});
    std::mt19937_64 rng(1);
    for (int t = 0; t < 20; ++t) {
        const auto ds = oracle::random_dataset(rng, 6, 5, t % 2 == 1);
        CHECK(max_abs_diff(linf_depth(ds).values, oracle::linf(ds, ds)) < 1e-12);
        const auto q = oracle::random_dataset(rng, 3, 5, false);
        CHECK(max_abs_diff(linf_depth(q, ds).values, oracle::linf(q, ds)) < 1e-12);
    }
    CHECK_THROWS_AS(linf_depth(oracle::constants({1}, 4), oracle::constants({1}, 5)), DimensionError);
}

TEST_CASE("band depth J=3") {
    CHECK(band_depth_j3(oracle::constants({1, 1, 1})).values == std::vector<double>{2, 2, 2});
    // Enumerating the one pair band and the one triple band containing the middle curve gives 1 + 1.
    const auto ordered = band_depth_j3(oracle::constants({0, 1, 2}));
    CHECK(ordered.values[1] == 2.0);
    CHECK(ordered.values[0] == doctest::Approx(2.0 / 3.0 + 1.0));
    CHECK(max_abs_diff(ordered.values, oracle::bd3(oracle::constants({0, 1, 2}), oracle::constants({0, 1, 2}))) == 0);
    CHECK_THROWS_AS(band_depth_j3(oracle::constants({0, 1})), DomainError);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const auto ds = oracle::random_dataset(rng, 8, 6, t % 2 == 1);
        const auto d = band_depth_j3(ds);
        CHECK(max_abs_diff(d.values, oracle::bd3(ds, ds)) < 1e-12);
        for (double v : d.values) CHECK((v >= 0.0 && v <= 2.0));
    }
    // More than 64 reference curves exercises multi-word bitmasks.
    const auto big = oracle::random_dataset(rng, 70, 4, false);
    const auto q = oracle::random_dataset(rng, 3, 4, false);
    CHECK(max_abs_diff(band_depth_j3(q, big).values, oracle::bd3(q, big)) < 1e-12);
}

TEST_CASE("modified band depth") {
    std::mt19937_64 rng(3);
    const auto two = oracle::random_dataset(rng, 2, 7, false);
    CHECK(mbd_naive(two).values == std::vector<double>{1.0, 1.0});
    CHECK(mbd_fast(two).values == std::vector<double>{1.0, 1.0});
    CHECK(mbd_fast(oracle::constants({2, 2, 2, 2})).values == std::vector<double>(4, 1.0));
    for (int t = 0; t < 30; ++t) {
        const auto ds = oracle::random_dataset(rng, 2 + t % 25, 2 + t % 30, t % 3 == 0);
        const auto fast = mbd_fast(ds).values;
        CHECK(max_abs_diff(fast, mbd_naive(ds).values) < 1e-12);
        CHECK(max_abs_diff(fast, oracle::mbd(ds, ds)) < 1e-12);
        const auto q = oracle::random_dataset(rng, 4, ds.points(), t % 3 == 0);
        CHECK(max_abs_diff(mbd_fast(q, ds).values, oracle::mbd(q, ds)) < 1e-12);
    }
    CHECK_THROWS_AS(mbd_fast(oracle::constants({1})), DomainError);
}

TEST_CASE("half-region depths") {
    const auto five = oracle::constants({0, 1, 2, 3, 4});
    CHECK(half_region_depth(five).values[2] == doctest::Approx(0.6));
    CHECK(modified_half_region_depth(five).values[2] == doctest::Approx(0.6));
    const auto ten = oracle::constants({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(modified_half_region_depth(ten).values[0] == doctest::Approx(0.1));

    // A curve crossing every other curve only bounds itself.
    const Grid g = Grid::uniform(2);
    const FunctionalDataset cross(g, {0, 0, 1, 1, 2, 2, -1, 3});
    CHECK(half_region_depth(cross).values[3] == doctest::Approx(0.25));

    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto ds = oracle::random_dataset(rng, 10, 6, t % 2 == 1);
        const auto h = half_region_depth(ds).values;
        CHECK(max_abs_diff(h, oracle::hrd(ds, ds)) < 1e-12);
        CHECK(max_abs_diff(modified_half_region_depth(ds).values, oracle::mhrd(ds, ds)) < 1e-12);
        for (double v : h) CHECK(v >= 0.1 - 1e-15);
        const auto q = oracle::random_dataset(rng, 3, 6, t % 2 == 1);
        CHECK(max_abs_diff(half_region_depth(q, ds).values, oracle::hrd(q, ds)) < 1e-12);
        CHECK(max_abs_diff(modified_half_region_depth(q, ds).values, oracle::mhrd(q, ds)) < 1e-12);
    }
}

TEST_CASE("HRD collapses to 1/n on rough curves") {
    const auto ds = sample_gp(KernelSpec::exp_pow(0.1), Grid::uniform(30), 100, 17);
    const auto h = half_region_depth(ds).values;
    const auto at_floor = std::count(h.begin(), h.end(), 1.0 / 100);
    CHECK(at_floor >= 80);
}

TEST_CASE("random Tukey depth") {
    const auto same = oracle::constants({1.5, 1.5, 1.5, 1.5});
    CHECK(random_tukey_depth(same, 25, 1).values == std::vector<double>(4, 1.0));

    // One direction, three collinear curves: univariate depths 1/3, 2/3, 1/3.
    const auto line = oracle::constants({-1, 0, 1});
    const auto one = random_tukey_depth(line, 1, 8).values;
    CHECK(one[1] == doctest::Approx(2.0 / 3.0));
    CHECK(one[0] == doctest::Approx(1.0 / 3.0));
    CHECK(one[2] == doctest::Approx(1.0 / 3.0));

    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        const auto ds = oracle::random_dataset(rng, 10, 7, false);
        const auto proj = draw_projections(ds.grid(), 50, t);
        std::vector<double> expected(ds.size(), INFINITY);
        for (std::size_t d = 0; d < proj.count; ++d) {
            std::vector<double> s(ds.size());
            for (std::size_t i = 0; i < ds.size(); ++i)
                for (std::size_t k = 0; k < ds.points(); ++k) s[i] += proj.direction(d)[k] * ds(i, k);
            for (std::size_t i = 0; i < ds.size(); ++i) expected[i] = std::min(expected[i], oracle::tukey1d(s[i], s));
        }
        CHECK(max_abs_diff(random_tukey_depth(ds, ds, proj).values, expected) < 1e-12);
        const auto a = random_tukey_depth(ds, 50, t, 1);
        CHECK(a.values == random_tukey_depth(ds, 50, t, 4).values);
        CHECK(a.seed == std::optional<std::uint64_t>(t));
    }
}

TEST_CASE("projection directions") {
    const Grid g = Grid::uniform(30);
    const auto a = draw_projections(g, 40, 3);
    CHECK(a.directions == draw_projections(g, 40, 3).directions);
    CHECK(a.directions != draw_projections(g, 40, 4).directions);
    // Prefix stability: the first k directions do not depend on the count.
    const auto b = draw_projections(g, 10, 3);
    CHECK(std::equal(b.directions.begin(), b.directions.end(), a.directions.begin()));
    CHECK_THROWS_AS(draw_projections(g, 0, 3), DomainError);
}

TEST_CASE("spatial depth") {
    CHECK(spatial_depth(oracle::constants({4})).values == std::vector<double>{1.0});
    const auto sym = spatial_depth(oracle::constants({-2, 0, 2})).values;
    CHECK(sym[1] == doctest::Approx(1.0));
    CHECK(sym[0] == doctest::Approx(1.0 / 3.0));
    CHECK(sym[2] == doctest::Approx(1.0 / 3.0));
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t) {
        const auto ds = oracle::random_dataset(rng, 10, 8, t % 2 == 1);
        for (auto rule : {Quadrature::Trapezoid, Quadrature::Uniform}) {
            const auto w = quadrature_weights(ds.grid(), rule);
            const auto d = spatial_depth(ds, rule).values;
            CHECK(max_abs_diff(d, oracle::spatial(ds, ds, w)) < 1e-12);
            for (double v : d) CHECK((v >= -1e-15 && v <= 1.0));
        }
        const auto q = oracle::random_dataset(rng, 3, 8, false);
        CHECK(max_abs_diff(spatial_depth(q, ds).values,
                           oracle::spatial(q, ds, quadrature_weights(ds.grid(), Quadrature::Trapezoid))) < 1e-12);
    }
}

TEST_CASE("compute_depth dispatch") {
    std::mt19937_64 rng(7);
    const auto ds = oracle::random_dataset(rng, 9, 6, false);
    DepthMethod m;
    m.kind = DepthKind::Linf;
    CHECK(compute_depth(ds, m).values == linf_depth(ds).values);
    m.kind = DepthKind::ModifiedBand2;
    CHECK(compute_depth(ds, m).values == mbd_fast(ds).values);
    m.kind = DepthKind::RandomTukey;
    m.seed = 12;
    m.n_proj = 30;
    const auto r = compute_depth(ds, m);
    CHECK(r.values == random_tukey_depth(ds, 30, 12).values);
    CHECK(r.method == DepthKind::RandomTukey);
    CHECK(r.seed == std::optional<std::uint64_t>(12));
}

TEST_CASE("non-crossing ordered curves: the middle curve is deepest for every method") {
    const Grid g = Grid::uniform(20);
    std::vector<double> v;
    for (int i = 0; i < 7; ++i)
        for (std::size_t k = 0; k < g.size(); ++k) v.push_back(i + 0.4 * std::sin(6.0 * g[k]));
    const FunctionalDataset ds(g, v);
    for (auto k : {DepthKind::Linf, DepthKind::Band3, DepthKind::ModifiedBand2, DepthKind::HalfRegion,
                   DepthKind::ModifiedHalfRegion, DepthKind::RandomTukey, DepthKind::Spatial}) {
        DepthMethod m;
        m.kind = k;
        m.seed = 1;
        const auto d = compute_depth(ds, m).values;
        CAPTURE(display_name(k));
        CHECK(d[3] > d[0]);
        CHECK(d[3] > d[6]);
    }
}

TEST_CASE("L-infinity depth isometric invariance") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 20; ++t) {
        const auto ds = oracle::random_dataset(rng, 12, 9, false);
        std::vector<double> y(9), zero(9, 0.0);
        for (auto& e : y) e = normal(rng);
        const auto base = linf_depth(ds).values;
        CHECK(max_abs_diff(linf_depth(transform(ds, -1.0, zero)).values, base) < 1e-12);
        CHECK(max_abs_diff(linf_depth(transform(ds, 1.0, y)).values, base) < 1e-12);
    }
}

TEST_CASE("L-infinity depth P2: maximal at the center of a symmetric sample") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    const Grid g = Grid::uniform(10);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> theta(10), v;
        for (auto& e : theta) e = normal(rng);
        for (int i = 0; i < 8; ++i) {
            std::vector<double> x(10);
            for (auto& e : x) e = 2.0 * normal(rng);
            for (std::size_t k = 0; k < 10; ++k) v.push_back(theta[k] + x[k]);
            for (std::size_t k = 0; k < 10; ++k) v.push_back(theta[k] - x[k]);
        }
        const FunctionalDataset sample(g, v);
        const double at_center = linf_depth(one_curve(g, theta), sample).values[0];
        for (double d : linf_depth(sample).values) CHECK(d <= at_center + 1e-12);
    }
}

TEST_CASE("L-infinity depth P3: monotone along rays from the deepest point") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> normal;
    const Grid g = Grid::uniform(10);
    for (int t = 0; t < 20; ++t) {
        // Symmetric sample that contains its center, so the deepest sample curve is the center.
        std::vector<double> theta(10), v;
        for (auto& e : theta) e = normal(rng);
        v.insert(v.end(), theta.begin(), theta.end());
        for (int i = 0; i < 6; ++i) {
            std::vector<double> x(10);
            for (auto& e : x) e = normal(rng);
            for (std::size_t k = 0; k < 10; ++k) v.push_back(theta[k] + x[k]);
            for (std::size_t k = 0; k < 10; ++k) v.push_back(theta[k] - x[k]);
        }
        const FunctionalDataset sample(g, v);
        const auto d = linf_depth(sample).values;
        const std::size_t deepest = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
        const auto top = sample.curve(deepest);
        for (std::size_t j = 0; j < sample.size(); ++j) {
            double previous = INFINITY;
            for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                std::vector<double> c(10);
                for (std::size_t k = 0; k < 10; ++k) c[k] = top[k] + alpha * (sample(j, k) - top[k]);
                const double now = linf_depth(one_curve(g, c), sample).values[0];
                CHECK(now <= previous + 1e-12);
                previous = now;
            }
        }
    }
}

TEST_CASE("L-infinity depth P4: vanishing at infinity") {
    std::mt19937_64 rng(11);
    const auto sample = oracle::random_dataset(rng, 15, 12, false);
    double max_norm = 0.0;
    for (double v : sample.values()) max_norm = std::max(max_norm, std::abs(v));
    for (double c : {1e2, 1e4, 1e6}) {
        const double d = linf_depth(one_curve(sample.grid(), std::vector<double>(12, c)), sample).values[0];
        CHECK(d <= 1.0 / (1.0 + c - max_norm) * (1.0 + 1e-12));
    }
}

TEST_CASE("domain permutation invariance") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 5; ++t) {
        const auto ds = oracle::random_dataset(rng, 12, 15, t % 2 == 1);
        std::vector<std::size_t> perm(15);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const auto pds = permute_columns(ds, perm);
        CHECK(linf_depth(pds).values == linf_depth(ds).values);
        CHECK(band_depth_j3(pds).values == band_depth_j3(ds).values);
        CHECK(mbd_fast(pds).values == mbd_fast(ds).values);
        CHECK(half_region_depth(pds).values == half_region_depth(ds).values);
        CHECK(modified_half_region_depth(pds).values == modified_half_region_depth(ds).values);
        CHECK(spatial_depth(pds, Quadrature::Uniform).values == spatial_depth(ds, Quadrature::Uniform).values);

        const auto proj = draw_projections(ds.grid(), 40, t);
        Projections pp = proj;
        for (std::size_t d = 0; d < proj.count; ++d)
            for (std::size_t k = 0; k < proj.points; ++k) pp.directions[d * proj.points + k] = proj.direction(d)[perm[k]];
        CHECK(random_tukey_depth(pds, pds, pp).values == random_tukey_depth(ds, ds, proj).values);
    }
}

TEST_CASE("threads do not change depths") {
    std::mt19937_64 rng(13);
    const auto ds = oracle::random_dataset(rng, 30, 10, false);
    for (auto k : {DepthKind::Linf, DepthKind::Band3, DepthKind::HalfRegion, DepthKind::RandomTukey,
                   DepthKind::Spatial}) {
        DepthMethod m;
        m.kind = k;
        m.seed = 2;
        CHECK(compute_depth(ds, m, 1).values == compute_depth(ds, m, 3).values);
    }
}
