#include "fdd/lightcurve.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include "fdd/parallel.hpp"
#include "fdd/rng.hpp"

namespace fdd {

namespace {

std::string star_prefix(const std::string& star_id) {
    return star_id.empty() ? std::string("light curve: ") : "star " + star_id + ": ";
}

}  // namespace

void RawLightCurve::validate() const {
    if (!(period > 0.0) || !std::isfinite(period)) throw DomainError(star_prefix(star_id) + "period must be positive");
    if (observations.size() < 2) throw DomainError(star_prefix(star_id) + "needs at least 2 observations");
    for (const auto& o : observations)
        if (!std::isfinite(o.time) || !std::isfinite(o.mag))
            throw DomainError(star_prefix(star_id) + "non-finite observation");
}

FoldedCurve fold(const RawLightCurve& lc) {
    lc.validate();
    FoldedCurve out;
    out.phases.reserve(lc.observations.size());
    out.magnitudes.reserve(lc.observations.size());
    double mean = 0.0;
    for (const auto& o : lc.observations) mean += o.mag;
    mean /= static_cast<double>(lc.observations.size());
    for (const auto& o : lc.observations) {
        const double cycles = o.time / lc.period;
        double phase = cycles - std::floor(cycles);
        if (phase >= 1.0) phase = 0.0;
        out.phases.push_back(phase);
        out.magnitudes.push_back(o.mag - mean);
    }
    return out;
}

NaturalSplineBasis::NaturalSplineBasis(std::size_t knots) {
    if (knots < 3) throw DomainError("natural spline needs at least 3 knots");
    knots_.resize(knots);
    for (std::size_t k = 0; k < knots; ++k) knots_[k] = static_cast<double>(k) / static_cast<double>(knots - 1);
}

std::vector<double> NaturalSplineBasis::evaluate(double x) const {
    const std::size_t K = knots_.size();
    const double last = knots_[K - 1];
    auto cube_plus = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
    auto d = [&](std::size_t k) { return (cube_plus(x - knots_[k]) - cube_plus(x - last)) / (last - knots_[k]); };
    std::vector<double> out(K);
    out[0] = 1.0;
    out[1] = x;
    const double d_last = d(K - 2);
    for (std::size_t k = 0; k + 2 < K; ++k) out[k + 2] = d(k) - d_last;
    return out;
}

Curve smooth(const FoldedCurve& fc, const Grid& grid, std::size_t knots, const std::string& star_id) {
    if (fc.phases.size() != fc.magnitudes.size())
        throw DimensionError(star_prefix(star_id) + "phases and magnitudes differ in length");
    const NaturalSplineBasis basis(knots);
    const std::size_t K = basis.size();

    std::vector<double> distinct = fc.phases;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < K)
        throw NumericalError(star_prefix(star_id) + "only " + std::to_string(distinct.size()) +
                             " distinct phases for " + std::to_string(K) + " spline coefficients");

    const auto m = static_cast<Eigen::Index>(fc.phases.size());
    Eigen::MatrixXd X(m, static_cast<Eigen::Index>(K));
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto row = basis.evaluate(fc.phases[static_cast<std::size_t>(i)]);
        for (std::size_t k = 0; k < K; ++k) X(i, static_cast<Eigen::Index>(k)) = row[k];
        y(i) = fc.magnitudes[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < static_cast<Eigen::Index>(K))
        throw NumericalError(star_prefix(star_id) + "rank-deficient spline design (rank " +
                             std::to_string(qr.rank()) + " of " + std::to_string(K) + ")");
    const Eigen::VectorXd beta = qr.solve(y);

    Curve out(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto row = basis.evaluate(grid[g]);
        double v = 0.0;
        for (std::size_t k = 0; k < K; ++k) v += row[k] * beta(static_cast<Eigen::Index>(k));
        out[g] = v;
    }
    return out;
}

Curve align_phase(CurveView c) {
    if (c.empty()) return {};
    const std::size_t shift = static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
    Curve out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[(k + shift) % c.size()];
    return out;
}

Grid phase_grid(std::size_t size) {
    if (size < 2) throw DomainError("phase grid needs at least 2 points");
    return Grid::uniform(size, 0);
}

Curve preprocess_one(const RawLightCurve& lc, const Grid& grid, std::size_t knots) {
    Curve c = align_phase(smooth(fold(lc), grid, knots, lc.star_id));
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= static_cast<double>(c.size());
    for (double& v : c) v -= mean;
    return c;
}

FunctionalDataset preprocess(const std::vector<RawLightCurve>& stars, const PrepOptions& options) {
    if (stars.empty()) throw DomainError("no light curves to preprocess");
    const Grid grid = phase_grid(options.grid_size);
    const std::size_t p = grid.size();
    std::vector<double> values(stars.size() * p);
    parallel_for(stars.size(), options.threads, [&](std::size_t i) {
        const Curve c = preprocess_one(stars[i], grid, options.knots);
        std::copy(c.begin(), c.end(), values.begin() + static_cast<std::ptrdiff_t>(i * p));
    });
    std::vector<std::string> labels;
    labels.reserve(stars.size());
    for (const auto& s : stars) labels.push_back(s.star_id);
    return FunctionalDataset(grid, std::move(values), std::move(labels));
}

// ------------------------------------------------------------------- I/O

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& field, std::size_t line, std::size_t column, const std::string& path) {
    const std::string t = trim(field);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (t.empty() || used != t.size() || !std::isfinite(v))
        throw ParseError(path + ": invalid number '" + t + "'", line, column);
    return v;
}

/// Reads non-comment, non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<std::pair<std::size_t, std::string>> out;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.emplace_back(no, line);
    }
    return out;
}

void expect_header(const std::vector<std::pair<std::size_t, std::string>>& lines, const std::vector<std::string>& names,
                   const std::string& path) {
    if (lines.empty()) throw ParseError(path + ": missing header", 1, 1);
    const auto fields = split_csv(lines.front().second);
    bool ok = fields.size() == names.size();
    for (std::size_t k = 0; ok && k < names.size(); ++k) ok = trim(fields[k]) == names[k];
    if (!ok) {
        std::string expected;
        for (const auto& n : names) expected += (expected.empty() ? "" : ",") + n;
        throw ParseError(path + ": header must be '" + expected + "'", lines.front().first, 1);
    }
}

}  // namespace

RawLightCurve load_light_curve(const std::string& path, const std::string& star_id, double period) {
    const auto lines = read_lines(path);
    expect_header(lines, {"time", "mag"}, path);
    RawLightCurve lc;
    lc.star_id = star_id;
    lc.period = period;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [no, line] = lines[r];
        const auto fields = split_csv(line);
        if (fields.size() != 2)
            throw ParseError(path + ": row has " + std::to_string(fields.size()) + " values, expected 2", no, 1);
        const double t = parse_number(fields[0], no, 1, path);
        const double m = parse_number(fields[1], no, fields[0].size() + 2, path);
        lc.observations.push_back({t, m});
    }
    lc.validate();
    return lc;
}

std::vector<RawLightCurve> load_manifest(const std::string& manifest_path) {
    const auto lines = read_lines(manifest_path);
    expect_header(lines, {"star_id", "period", "path"}, manifest_path);
    const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    std::vector<RawLightCurve> stars;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto& [no, line] = lines[r];
        const auto fields = split_csv(line);
        if (fields.size() != 3)
            throw ParseError(manifest_path + ": row has " + std::to_string(fields.size()) + " values, expected 3", no,
                             1);
        const std::string id = trim(fields[0]);
        if (id.empty()) throw ParseError(manifest_path + ": empty star id", no, 1);
        const double period = parse_number(fields[1], no, fields[0].size() + 2, manifest_path);
        if (!(period > 0.0))
            throw ParseError(manifest_path + ": period must be positive", no, fields[0].size() + 2);
        std::filesystem::path file = trim(fields[2]);
        if (file.is_relative()) file = base / file;
        stars.push_back(load_light_curve(file.string(), id, period));
    }
    if (stars.empty()) throw ParseError(manifest_path + ": manifest lists no stars", lines.front().first, 1);
    return stars;
}

void save_light_curves(const std::vector<RawLightCurve>& stars, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream manifest(std::filesystem::path(dir) / "manifest.csv");
    if (!manifest) throw Error("cannot write manifest in " + dir);
    manifest << "star_id,period,path\n";
    for (const auto& s : stars) {
        if (s.star_id.find_first_of(",\n/\\") != std::string::npos)
            throw DomainError("star id '" + s.star_id + "' cannot be written to a manifest");
        const std::string file = s.star_id + ".csv";
        std::ofstream out(std::filesystem::path(dir) / file);
        if (!out) throw Error("cannot write " + file);
        out << "time,mag\n";
        for (const auto& o : s.observations) out << format_real(o.time) << ',' << format_real(o.mag) << '\n';
        manifest << s.star_id << ',' << format_real(s.period) << ',' << file << '\n';
    }
}

// -------------------------------------------------------- synthetic data

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Smoothed sawtooth in magnitudes (slow fading, fast brightening) with a
// secondary dip, before alignment and scaling.
double raw_template(double phase) {
    static constexpr double a[] = {1.0, 0.55, 0.32, 0.17, 0.08};
    double v = 0.0;
    for (int k = 1; k <= 5; ++k) v -= a[k - 1] * std::sin(kTwoPi * k * phase) / k;
    return v + 0.12 * std::cos(kTwoPi * 3.0 * phase + 0.9);
}

struct TemplateShape {
    double offset = 0.0;  // phase of the raw minimum
    double mean = 0.0;
    double scale = 1.0;

    TemplateShape() {
        constexpr int fine = 20000;
        double best = raw_template(0.0);
        double sum = 0.0, hi = best;
        for (int k = 0; k < fine; ++k) {
            const double ph = static_cast<double>(k) / fine;
            const double v = raw_template(ph);
            sum += v;
            hi = std::max(hi, v);
            if (v < best) {
                best = v;
                offset = ph;
            }
        }
        mean = sum / fine;
        scale = kRange / (hi - best);
    }
    double operator()(double phase) const { return scale * (raw_template(phase + offset) - mean); }

    static constexpr double kRange = 0.8;  // peak-to-peak magnitudes
};

const TemplateShape& template_shape() {
    static const TemplateShape shape;
    return shape;
}

constexpr double kAmplitudeSd = 0.1;
constexpr double kPhaseJitter = 0.01;
constexpr double kNoiseSd = 0.08;
constexpr double kNoiseScale = 0.02;  // correlation length in phase
constexpr double kInflated = 1.8;
constexpr double kDeflated = 0.5;
constexpr double kDeflatedNoise = 0.1;  // relative to kNoiseSd
constexpr double kShift = 0.25;

// Lower factor of exp(-d/scale) with d the circular phase distance.
Eigen::MatrixXd periodic_noise_factor(const Grid& grid) {
    const auto p = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd cov(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) {
            double d = std::abs(grid[static_cast<std::size_t>(i)] - grid[static_cast<std::size_t>(j)]);
            d = std::min(d, 1.0 - d);
            cov(i, j) = std::exp(-d / kNoiseScale);
        }
    for (double jitter = 1e-12; jitter <= 1e-6; jitter *= 10.0) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov + jitter * Eigen::MatrixXd::Identity(p, p));
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw NumericalError("periodic noise covariance is not positive definite");
}

std::size_t count_for(double fraction, std::size_t n) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw DomainError("outlier fractions must lie in [0, 1]");
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

std::vector<bool> SyntheticLightCurves::outlier_flags() const {
    std::vector<bool> out(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) out[i] = kinds[i] != LightCurveKind::Inlier;
    return out;
}

Curve lightcurve_template(const Grid& grid) {
    Curve out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = template_shape()(grid[k]);
    return out;
}

SyntheticLightCurves synth_lightcurves(std::size_t n, const OutlierSpec& outliers, std::uint64_t seed) {
    if (n == 0) throw DomainError("need at least one curve");
    const std::size_t n_infl = count_for(outliers.inflated, n);
    const std::size_t n_defl = count_for(outliers.deflated, n);
    const std::size_t n_shift = count_for(outliers.shifted, n);
    if (n_infl + n_defl + n_shift > n) throw DomainError("outlier fractions add up to more than n curves");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng placement = make_rng(seed, {0x4C43, 0});
    std::shuffle(order.begin(), order.end(), placement);
    std::vector<LightCurveKind> kinds(n, LightCurveKind::Inlier);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < n_infl; ++k) kinds[order[pos++]] = LightCurveKind::AmplitudeInflated;
    for (std::size_t k = 0; k < n_defl; ++k) kinds[order[pos++]] = LightCurveKind::AmplitudeDeflated;
    for (std::size_t k = 0; k < n_shift; ++k) kinds[order[pos++]] = LightCurveKind::PhaseShifted;

    const Grid grid = phase_grid(100);
    const auto p = static_cast<Eigen::Index>(grid.size());
    const Eigen::MatrixXd L = periodic_noise_factor(grid);
    const auto& shape = template_shape();

    std::vector<double> values(n * grid.size());
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_rng(seed, {0x4C43, 1, i});
        std::normal_distribution<double> normal;
        const double amp_z = normal(rng);
        const double phase_z = normal(rng);
        Eigen::VectorXd z(p);
        for (Eigen::Index k = 0; k < p; ++k) z(k) = normal(rng);
        const Eigen::VectorXd noise = L * z;

        double amplitude = 1.0 + kAmplitudeSd * amp_z;
        double noise_sd = kNoiseSd;
        double phase0 = kPhaseJitter * phase_z;
        switch (kinds[i]) {
            case LightCurveKind::Inlier: break;
            case LightCurveKind::AmplitudeInflated: amplitude = kInflated + kAmplitudeSd * amp_z; break;
            case LightCurveKind::AmplitudeDeflated:
                amplitude = kDeflated;
                noise_sd *= kDeflatedNoise;
                break;
            case LightCurveKind::PhaseShifted: phase0 += kShift; break;
        }
        double* row = &values[i * grid.size()];
        double mean = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            row[k] = amplitude * shape(grid[k] + phase0) + noise_sd * noise(static_cast<Eigen::Index>(k));
            mean += row[k];
        }
        mean /= static_cast<double>(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) row[k] -= mean;
        labels[i] = "lc" + std::to_string(i);
    }
    return {FunctionalDataset(grid, std::move(values), std::move(labels)), std::move(kinds)};
}

std::vector<RawLightCurve> synth_raw_lightcurves(std::size_t n, std::uint64_t seed, std::size_t observations,
                                                 double noise) {
    if (observations == 0) throw DomainError("need at least one observation per star");
    if (!(noise >= 0.0)) throw DomainError("noise must be non-negative");
    const auto& shape = template_shape();
    std::vector<RawLightCurve> stars(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_rng(seed, {0x524157, i});
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> normal;
        auto& s = stars[i];
        s.star_id = "star" + std::to_string(i);
        s.period = std::exp(std::log(3.0) + unif(rng) * (std::log(40.0) - std::log(3.0)));
        const double phase0 = unif(rng);
        const double base_mag = 10.0 + 4.0 * unif(rng);
        const double amplitude = 1.0 + kAmplitudeSd * normal(rng);
        s.observations.resize(observations);
        for (auto& o : s.observations) {
            o.time = 1000.0 * unif(rng);
            o.mag = base_mag + amplitude * shape(o.time / s.period + phase0) + noise * normal(rng);
        }
        std::sort(s.observations.begin(), s.observations.end(),
                  [](const Observation& a, const Observation& b) { return a.time < b.time; });
    }
    return stars;
}

}  // namespace fdd
