#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fdd/robust.hpp"
#include "oracles.hpp"

using namespace fdd;

namespace {

DepthVector depths(std::vector<double> v) {
    DepthVector d;
    d.values = std::move(v);
    return d;
}

}  // namespace

TEST_CASE("pointwise mean and median") {
    const auto one = oracle::constants({2.5}, 4);
    CHECK(pointwise_mean(one) == Curve(4, 2.5));
    CHECK(pointwise_median(one) == Curve(4, 2.5));
    const auto three = oracle::constants({0, 1, 5}, 3);
    CHECK(pointwise_mean(three) == Curve(3, 2.0));
    CHECK(pointwise_median(three) == Curve(3, 1.0));
    CHECK(pointwise_median(oracle::constants({0, 1, 5, 7}, 2)) == Curve(2, 3.0));

    std::mt19937_64 rng(1);
    const auto ds = oracle::random_dataset(rng, 7, 9, false);
    const auto med = pointwise_median(ds);
    for (std::size_t k = 0; k < 9; ++k) {
        std::vector<double> col;
        for (std::size_t i = 0; i < 7; ++i) col.push_back(ds(i, k));
        std::sort(col.begin(), col.end());
        CHECK(med[k] == col[3]);
    }
}

TEST_CASE("trimmed mean keeps the deepest ceil(n(1-alpha)) curves") {
    std::mt19937_64 rng(2);
    const auto ds = oracle::random_dataset(rng, 50, 6, false);
    std::vector<double> d(50);
    std::iota(d.begin(), d.end(), 0.0);
    std::shuffle(d.begin(), d.end(), rng);

    CHECK(trimmed_mean(ds, depths(d), TrimSpec{0.0}, 1) == pointwise_mean(ds));

    const auto t = trimmed_mean(ds, depths(d), TrimSpec{0.2}, 1);
    Curve expected(6, 0.0);
    for (std::size_t i = 0; i < 50; ++i)
        if (d[i] >= 10)
            for (std::size_t k = 0; k < 6; ++k) expected[k] += ds(i, k);
    for (auto& v : expected) v /= 40.0;
    CHECK(oracle::max_abs_diff(t, expected) < 1e-12);

    const auto five = oracle::constants({1, 2, 3, 4, 100}, 3);
    const auto f = trimmed_mean(five, depths({0.5, 0.6, 0.7, 0.8, 0.1}), TrimSpec{0.2}, 1);
    CHECK(oracle::max_abs_diff(f, Curve(3, 2.5)) < 1e-15);

    CHECK_THROWS_AS(trimmed_mean(five, depths({1, 2}), TrimSpec{0.2}, 1), DimensionError);
    CHECK_THROWS_AS(TrimSpec{1.0}.validate(), DomainError);
}

TEST_CASE("trimmed mean is permutation equivariant") {
    std::mt19937_64 rng(3);
    const auto ds = oracle::random_dataset(rng, 20, 5, false);
    const auto d = linf_depth(ds);
    std::vector<std::size_t> perm(20);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto pds = ds.subset(perm);
    const auto a = trimmed_mean(ds, d, TrimSpec{}, 5);
    const auto b = trimmed_mean(pds, linf_depth(pds), TrimSpec{}, 5);
    CHECK(oracle::max_abs_diff(a, b) < 1e-12);
}

TEST_CASE("moving a trimmed outlier further away leaves the estimate unchanged") {
    auto spec = ModelSpec::preset(ModelId::M0);
    const auto s = generate(spec, 4);
    std::vector<double> v(s.data.values().begin(), s.data.values().end());
    for (std::size_t k = 0; k < 30; ++k) v[7 * 30 + k] += 50.0;
    const FunctionalDataset base(s.data.grid(), v);
    const auto before = trimmed_mean(base, linf_depth(base), TrimSpec{}, 1);
    for (double extra : {10.0, 1e3, 1e6}) {
        auto w = v;
        for (std::size_t k = 0; k < 30; ++k) w[7 * 30 + k] += extra;
        const FunctionalDataset moved(s.data.grid(), w);
        CHECK(trimmed_mean(moved, linf_depth(moved), TrimSpec{}, 1) == before);
    }
}

TEST_CASE("integrated squared error") {
    const Curve f{1.0, 2.0, 3.0};
    CHECK(ise(f, f) == 0.0);
    Curve truth(30, 0.0), offset(30, 0.3);
    CHECK(ise(offset, truth) == doctest::Approx(0.09));
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal;
    Curve a(30), b(30);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng);
    double s = 0.0;
    for (std::size_t k = 0; k < 30; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    CHECK(ise(a, b) == doctest::Approx(s / 30.0).epsilon(1e-14));
    CHECK_THROWS_AS(ise(a, f), DimensionError);
}

TEST_CASE("estimator names") {
    const auto set = Estimator::standard_set();
    std::vector<std::string> names;
    for (const auto& e : set) names.push_back(e.name());
    CHECK(names == std::vector<std::string>{"MEAN", "MED", "BD", "MBD", "HRD", "MHRD", "RTD", "SPATD", "LINFD"});
    for (const auto& e : set) CHECK(Estimator::parse(e.name()).name() == e.name());
    CHECK_THROWS_AS(Estimator::parse("TRIM"), DomainError);
}

TEST_CASE("mise report layout and thread independence") {
    MiseConfig cfg;
    cfg.models = {ModelSpec::preset(ModelId::M0), ModelSpec::preset(ModelId::M1)};
    cfg.estimators = {Estimator::mean(), Estimator::trimmed(DepthKind::Linf), Estimator::trimmed(DepthKind::RandomTukey)};
    cfg.n_reps = 12;
    cfg.seed = 3;
    cfg.n_proj = 20;
    const auto a = mise_experiment(cfg);
    cfg.threads = 3;
    const auto b = mise_experiment(cfg);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.to_json() == b.to_json());
    CHECK(a.rows == std::vector<std::string>{"MEAN", "LINFD", "RTD"});
    CHECK(a.columns == std::vector<std::string>{"M0", "M1"});
    CHECK(a.to_csv().rfind("estimator,M0,M1\nMEAN,", 0) == 0);
    CHECK(a.at("MEAN", "M0").n_reps == 12);
    CHECK(a.at("MEAN", "M0").se >= 0.0);
    CHECK_THROWS_AS(a.at("MED", "M0"), DomainError);

    // A cell does not depend on the other models in the run.
    cfg.models = {ModelSpec::preset(ModelId::M1)};
    const auto c = mise_experiment(cfg);
    CHECK(c.at("LINFD", "M1").value == a.at("LINFD", "M1").value);
}

TEST_CASE("mise standard error shrinks like 1/sqrt(n_reps)") {
    MiseConfig cfg;
    cfg.models = {ModelSpec::preset(ModelId::M0)};
    cfg.estimators = {Estimator::mean()};
    cfg.seed = 11;
    std::vector<double> se;
    for (std::size_t reps : {50, 200, 800}) {
        cfg.n_reps = reps;
        se.push_back(mise_experiment(cfg).at("MEAN", "M0").se);
    }
    CHECK(se[0] / se[1] == doctest::Approx(2.0).epsilon(0.3));
    CHECK(se[1] / se[2] == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("vanishing contamination approaches the clean column") {
    MiseConfig cfg;
    cfg.estimators = {Estimator::mean(), Estimator::trimmed(DepthKind::Linf)};
    cfg.n_reps = 200;
    cfg.seed = 5;
    cfg.models = {ModelSpec::preset(ModelId::M0), ModelSpec::preset(ModelId::M1, 0.01)};
    const auto r = mise_experiment(cfg);
    for (const auto* est : {"MEAN", "LINFD"}) {
        const auto& a = r.at(est, "M0");
        const auto& b = r.at(est, "M1");
        CHECK(std::abs(a.value - b.value) < 4.0 * std::hypot(a.se, b.se));
    }
}

TEST_CASE("detection of a far planted curve") {
    DetectionConfig cfg;
    cfg.models = {ModelSpec::preset(ModelId::M5), ModelSpec::preset(ModelId::M8)};
    cfg.methods = {DepthKind::Linf, DepthKind::Spatial};
    cfg.n_reps = 20;
    cfg.outlier_shift = 1e6;
    const auto r = detection_experiment(cfg);
    CHECK(r.at("LINFD", "M5").value == 1.0);
    CHECK(r.at("LINFD", "M8").value == 1.0);
    CHECK(r.at("SPATD", "M5").value == 1.0);
    CHECK(r.metric == "detection_rate");

    cfg.models = {ModelSpec::preset(ModelId::M1)};
    CHECK_THROWS_AS(detection_experiment(cfg), DomainError);
}
