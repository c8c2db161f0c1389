#include "fdd/robust.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fdd/parallel.hpp"
#include "fdd/rng.hpp"

namespace fdd {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

ExperimentReport::Cell summarize(std::span<const double> xs) {
    ExperimentReport::Cell c;
    c.n_reps = xs.size();
    CompensatedSum s;
    for (double x : xs) s.add(x);
    c.value = s.value() / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        CompensatedSum ss;
        for (double x : xs) ss.add((x - c.value) * (x - c.value));
        c.se = std::sqrt(ss.value() / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
    }
    return c;
}

std::string format_fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

DepthMethod method_for(DepthKind kind, std::size_t n_proj, std::uint64_t seed) {
    DepthMethod m;
    m.kind = kind;
    m.n_proj = n_proj;
    m.seed = seed;
    return m;
}

}  // namespace

void TrimSpec::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("trim fraction alpha must lie in [0, 1)");
}

Curve pointwise_mean(const FunctionalDataset& ds) {
    Curve m(ds.points(), 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < ds.points(); ++k) m[k] += ds(i, k);
    for (auto& v : m) v /= static_cast<double>(ds.size());
    return m;
}

Curve pointwise_median(const FunctionalDataset& ds) {
    const std::size_t n = ds.size();
    Curve med(ds.points());
    std::vector<double> col(n);
    for (std::size_t k = 0; k < ds.points(); ++k) {
        for (std::size_t i = 0; i < n; ++i) col[i] = ds(i, k);
        std::sort(col.begin(), col.end());
        med[k] = n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
    }
    return med;
}

Curve trimmed_mean(const FunctionalDataset& ds, const DepthVector& depth, TrimSpec trim, std::uint64_t tie_seed) {
    trim.validate();
    const std::size_t n = ds.size();
    if (depth.size() != n)
        throw DimensionError("depth vector has " + std::to_string(depth.size()) + " entries for " +
                             std::to_string(n) + " curves");
    const auto ranks = rank_curves(depth, tie_seed);
    // Guard against n * alpha landing a rounding error below an integer.
    const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * trim.alpha + 1e-9));

    Curve m(ds.points(), 0.0);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (ranks.ranks[i] <= cut) continue;
        ++kept;
        for (std::size_t k = 0; k < ds.points(); ++k) m[k] += ds(i, k);
    }
    for (auto& v : m) v /= static_cast<double>(kept);
    return m;
}

double ise(CurveView estimate, CurveView truth) {
    if (estimate.size() != truth.size())
        throw DimensionError("ise: estimate has " + std::to_string(estimate.size()) + " points, truth has " +
                             std::to_string(truth.size()));
    double s = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        const double d = estimate[k] - truth[k];
        s += d * d;
    }
    return s / static_cast<double>(truth.size());
}

// -------------------------------------------------------------- estimators

std::vector<Estimator> Estimator::standard_set() {
    return {mean(),
            median(),
            trimmed(DepthKind::Band3),
            trimmed(DepthKind::ModifiedBand2),
            trimmed(DepthKind::HalfRegion),
            trimmed(DepthKind::ModifiedHalfRegion),
            trimmed(DepthKind::RandomTukey),
            trimmed(DepthKind::Spatial),
            trimmed(DepthKind::Linf)};
}

Estimator Estimator::parse(const std::string& token) {
    std::string t = token;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "mean") return mean();
    if (t == "med" || t == "median") return median();
    return trimmed(parse_depth_kind(t));
}

std::string Estimator::name() const {
    switch (kind) {
        case EstimatorKind::Mean: return "MEAN";
        case EstimatorKind::Median: return "MED";
        case EstimatorKind::Trimmed: return display_name(depth);
    }
    return "?";
}

// ------------------------------------------------------------------ reports

const ExperimentReport::Cell& ExperimentReport::at(const std::string& row, const std::string& column) const {
    const auto r = std::find(rows.begin(), rows.end(), row);
    const auto c = std::find(columns.begin(), columns.end(), column);
    if (r == rows.end() || c == columns.end()) throw DomainError("no report cell (" + row + ", " + column + ")");
    return cells[static_cast<std::size_t>(r - rows.begin())][static_cast<std::size_t>(c - columns.begin())];
}

std::string ExperimentReport::to_csv(int precision) const {
    std::string out = metric == "mise" ? "estimator" : "method";
    for (const auto& c : columns) out += "," + c;
    out += "\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out += rows[r];
        for (const auto& cell : cells[r])
            out += "," + format_fixed(cell.value, precision) + " (" + format_fixed(cell.se, precision) + ")";
        out += "\n";
    }
    return out;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j;
    j["metric"] = metric;
    j["rows"] = rows;
    j["columns"] = columns;
    auto& cs = j["cells"] = nlohmann::json::array();
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < columns.size(); ++c)
            cs.push_back({{"row", rows[r]},
                          {"column", columns[c]},
                          {"value", cells[r][c].value},
                          {"se", cells[r][c].se},
                          {"n_reps", cells[r][c].n_reps}});
    j["metadata"] = metadata;
    return j;
}

nlohmann::json to_json(const ModelSpec& spec) {
    static const char* means[] = {"4t", "4t^2", "4t^3"};
    return {{"model", to_string(spec.id)},
            {"mean", means[static_cast<int>(spec.mean)]},
            {"M", spec.magnitude},
            {"q", spec.q},
            {"l", spec.peak_width},
            {"mu2", spec.roughness},
            {"base_kernel", spec.base_kernel().describe()},
            {"outlier_kernel", spec.outlier_kernel() ? spec.outlier_kernel()->describe() : "none"},
            {"grid_points", spec.grid.size()},
            {"n", spec.n}};
}

// ------------------------------------------------------------- experiments

ExperimentReport mise_experiment(const MiseConfig& config) {
    if (config.models.empty()) throw DomainError("mise_experiment: no models");
    if (config.estimators.empty()) throw DomainError("mise_experiment: no estimators");
    if (config.n_reps == 0) throw DomainError("mise_experiment: n_reps must be at least 1");
    config.trim.validate();

    std::vector<ModelSampler> samplers;
    samplers.reserve(config.models.size());
    for (const auto& m : config.models) samplers.emplace_back(m);

    const std::size_t n_models = config.models.size();
    const std::size_t n_est = config.estimators.size();
    // ise[(rep * n_models + model) * n_est + estimator]
    std::vector<double> errors(config.n_reps * n_models * n_est);

    parallel_for(config.n_reps, config.threads, [&](std::size_t rep) {
        for (std::size_t m = 0; m < n_models; ++m) {
            // Keyed by model id so a cell does not depend on which other models run.
            const auto model_key = static_cast<std::uint64_t>(config.models[m].id);
            const std::uint64_t data_seed = derive_seed(config.seed, {1, model_key, rep});
            const std::uint64_t tie_seed = derive_seed(config.seed, {2, model_key, rep});
            const std::uint64_t rtd_seed = derive_seed(config.seed, {3, model_key, rep});
            const auto sample = samplers[m].generate(data_seed);
            for (std::size_t e = 0; e < n_est; ++e) {
                const auto& est = config.estimators[e];
                Curve fit;
                switch (est.kind) {
                    case EstimatorKind::Mean: fit = pointwise_mean(sample.data); break;
                    case EstimatorKind::Median: fit = pointwise_median(sample.data); break;
                    case EstimatorKind::Trimmed: {
                        const auto d = compute_depth(sample.data, method_for(est.depth, config.n_proj, rtd_seed));
                        fit = trimmed_mean(sample.data, d, config.trim, tie_seed);
                        break;
                    }
                }
                errors[(rep * n_models + m) * n_est + e] = ise(fit, sample.truth);
            }
        }
    });

    ExperimentReport report;
    report.metric = "mise";
    for (const auto& e : config.estimators) report.rows.push_back(e.name());
    for (const auto& m : config.models) report.columns.push_back(to_string(m.id));
    report.cells.assign(n_est, std::vector<ExperimentReport::Cell>(n_models));
    std::vector<double> xs(config.n_reps);
    for (std::size_t e = 0; e < n_est; ++e)
        for (std::size_t m = 0; m < n_models; ++m) {
            for (std::size_t rep = 0; rep < config.n_reps; ++rep) xs[rep] = errors[(rep * n_models + m) * n_est + e];
            report.cells[e][m] = summarize(xs);
        }

    auto& meta = report.metadata;
    meta["seed"] = config.seed;
    meta["n_reps"] = config.n_reps;
    meta["alpha"] = config.trim.alpha;
    meta["n_proj"] = config.n_proj;
    meta["models"] = nlohmann::json::array();
    for (const auto& m : config.models) meta["models"].push_back(to_json(m));
    return report;
}

ExperimentReport detection_experiment(const DetectionConfig& config) {
    if (config.models.empty()) throw DomainError("detection_experiment: no models");
    if (config.methods.empty()) throw DomainError("detection_experiment: no depth methods");
    if (config.n_reps == 0) throw DomainError("detection_experiment: n_reps must be at least 1");
    if (!(config.fraction > 0.0 && config.fraction <= 1.0)) throw DomainError("detection fraction must lie in (0, 1]");

    std::vector<ModelSampler> samplers;
    for (const auto& m : config.models) {
        if (!is_shape_model(m.id)) throw DomainError("detection_experiment needs shape models M5-M9");
        samplers.emplace_back(m);
    }
    const std::size_t n_models = config.models.size();
    const std::size_t n_methods = config.methods.size();
    std::vector<double> hits(config.n_reps * n_models * n_methods);

    parallel_for(config.n_reps, config.threads, [&](std::size_t rep) {
        for (std::size_t m = 0; m < n_models; ++m) {
            const auto model_key = static_cast<std::uint64_t>(config.models[m].id);
            const std::uint64_t data_seed = derive_seed(config.seed, {1, model_key, rep});
            const std::uint64_t tie_seed = derive_seed(config.seed, {2, model_key, rep});
            const std::uint64_t rtd_seed = derive_seed(config.seed, {3, model_key, rep});
            const std::size_t n = config.models[m].n;
            std::vector<bool> forced(n, false);
            forced.back() = true;
            auto sample = samplers[m].generate(data_seed, &forced);
            if (config.outlier_shift != 0.0) {
                std::vector<double> v(sample.data.values().begin(), sample.data.values().end());
                for (std::size_t k = 0; k < sample.data.points(); ++k) v[(n - 1) * sample.data.points() + k] += config.outlier_shift;
                sample.data = FunctionalDataset(sample.data.grid(), std::move(v), sample.data.labels());
            }
            const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(n) * config.fraction + 1e-9));
            for (std::size_t d = 0; d < n_methods; ++d) {
                const auto depth = compute_depth(sample.data, method_for(config.methods[d], config.n_proj, rtd_seed));
                std::size_t rank = 0;
                if (config.ranking == DetectionRank::Counting) {
                    for (double v : depth.values) rank += v <= depth.values[n - 1];
                } else {
                    rank = rank_curves(depth, tie_seed).ranks[n - 1];
                }
                hits[(rep * n_models + m) * n_methods + d] = rank <= cut ? 1.0 : 0.0;
            }
        }
    });

    ExperimentReport report;
    report.metric = "detection_rate";
    for (auto k : config.methods) report.rows.push_back(display_name(k));
    for (const auto& m : config.models) report.columns.push_back(to_string(m.id));
    report.cells.assign(n_methods, std::vector<ExperimentReport::Cell>(n_models));
    std::vector<double> xs(config.n_reps);
    for (std::size_t d = 0; d < n_methods; ++d)
        for (std::size_t m = 0; m < n_models; ++m) {
            for (std::size_t rep = 0; rep < config.n_reps; ++rep) xs[rep] = hits[(rep * n_models + m) * n_methods + d];
            report.cells[d][m] = summarize(xs);
        }

    auto& meta = report.metadata;
    meta["seed"] = config.seed;
    meta["n_reps"] = config.n_reps;
    meta["fraction"] = config.fraction;
    meta["n_proj"] = config.n_proj;
    meta["outlier_shift"] = config.outlier_shift;
    meta["ranking"] = config.ranking == DetectionRank::Counting ? "counting" : "random_ties";
    meta["models"] = nlohmann::json::array();
    for (const auto& m : config.models) meta["models"].push_back(to_json(m));
    return report;
}

}  // namespace fdd
