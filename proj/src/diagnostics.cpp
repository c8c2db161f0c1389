#include "fdd/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "fdd/parallel.hpp"
#include "fdd/rng.hpp"

namespace fdd {

namespace {

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionError("correlation needs sequences of equal length");
    if (a.size() < 2) throw DomainError("correlation needs at least two pairs");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw DomainError("correlation of a constant sequence is undefined");
    return sab / std::sqrt(saa * sbb);
}

std::vector<double> to_double(std::span<const std::size_t> v) { return {v.begin(), v.end()}; }

}  // namespace

double spearman(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    const auto da = to_double(a);
    const auto db = to_double(b);
    return pearson(da, db);
}

double spearman(std::span<const double> a, std::span<const double> b) { return pearson(a, b); }

// --------------------------------------------------------------- rank-rank

RankRankReport rank_rank(const FunctionalDataset& ds, const DepthMethod& method, std::uint64_t split_seed,
                         std::uint64_t tie_seed, unsigned threads) {
    const std::size_t n = ds.size();
    const std::size_t m = n / 2;
    if (m < 2) throw DomainError("rank-rank needs at least 4 curves");
    if (method.kind == DepthKind::Band3 && n - m < 3) throw DomainError("band depth needs at least 3 reference curves");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng = make_rng(split_seed, {0x5350, 0x4C4954});
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::vector<std::size_t> first(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
    const std::vector<std::size_t> second(perm.begin() + static_cast<std::ptrdiff_t>(m), perm.end());
    const FunctionalDataset x1 = ds.subset(first);
    const FunctionalDataset x2 = ds.subset(second);

    const DepthVector in_sample = compute_depth(x1, method, threads);
    const DepthVector cross = compute_depth(x1, x2, method, threads);
    const RankVector r_in = rank_curves(in_sample, derive_seed(tie_seed, {1}));
    const RankVector r_cross = rank_curves(cross, derive_seed(tie_seed, {2}));

    RankRankReport report;
    report.method = method;
    report.split_seed = split_seed;
    report.tie_seed = tie_seed;
    report.first_half = first;
    report.pairs.resize(m);
    for (std::size_t i = 0; i < m; ++i) report.pairs[i] = {r_in.ranks[i], r_cross.ranks[i]};
    report.spearman = spearman(r_in.ranks, r_cross.ranks);
    return report;
}

std::string RankRankReport::to_csv(const FunctionalDataset& ds) const {
    std::ostringstream out;
    out << "label,rank_in_sample,rank_cross\n";
    for (std::size_t i = 0; i < pairs.size(); ++i)
        out << ds.labels()[first_half[i]] << ',' << pairs[i].first << ',' << pairs[i].second << '\n';
    return out.str();
}

nlohmann::json RankRankReport::to_json() const {
    nlohmann::json j;
    j["method"] = to_string(method.kind);
    j["n_proj"] = method.n_proj;
    j["depth_seed"] = method.seed;
    j["split_seed"] = split_seed;
    j["tie_seed"] = tie_seed;
    j["spearman"] = spearman;
    j["half_size"] = pairs.size();
    return j;
}

std::vector<double> deepest_stability(const RankRankReport& report, std::size_t k) {
    const std::size_t m = report.pairs.size();
    if (k > m) throw DomainError("k exceeds the half-sample size");
    std::vector<std::pair<std::size_t, std::size_t>> by_in = report.pairs;
    std::sort(by_in.begin(), by_in.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = static_cast<double>(by_in[i].second) / static_cast<double>(m);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> deepest_stability(const FunctionalDataset& ds, const DepthMethod& method, std::size_t k,
                                      std::uint64_t split_seed, std::uint64_t tie_seed, unsigned threads) {
    return deepest_stability(rank_rank(ds, method, split_seed, tie_seed, threads), k);
}

std::string rank_rank_svg(const RankRankReport& report, const std::string& title) {
    constexpr double size = 400.0, margin = 40.0, plot = size - 2.0 * margin;
    const double m = static_cast<double>(report.pairs.size());
    auto px = [&](double r) { return margin + (r - 0.5) / m * plot; };
    auto py = [&](double r) { return size - margin - (r - 0.5) / m * plot; };
    auto escape = [](const std::string& s) {
        std::string out;
        for (char c : s) {
            switch (c) {
                case '&': out += "&amp;"; break;
                case '<': out += "&lt;"; break;
                case '>': out += "&gt;"; break;
                default: out += c;
            }
        }
        return out;
    };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"0 0 400 400\">\n";
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot << "\" height=\"" << plot
        << "\" fill=\"none\" stroke=\"#888\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << size - margin << "\" x2=\"" << size - margin << "\" y2=\""
        << margin << "\" stroke=\"#c33\" stroke-dasharray=\"4 3\"/>\n";
    for (const auto& [a, b] : report.pairs)
        out << "<circle cx=\"" << px(static_cast<double>(a)) << "\" cy=\"" << py(static_cast<double>(b))
            << "\" r=\"2.5\" fill=\"#236\"/>\n";
    const std::string heading =
        (title.empty() ? display_name(report.method.kind) : title) + "  (rho = " + format_real(report.spearman) + ")";
    out << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"13\">" << escape(heading)
        << "</text>\n";
    out << "<text x=\"" << size / 2 << "\" y=\"" << size - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">in-sample rank</text>\n";
    out << "<text x=\"14\" y=\"" << size / 2 << "\" transform=\"rotate(-90 14 " << size / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">cross rank</text>\n";
    out << "</svg>\n";
    return out.str();
}

// ------------------------------------------------------------- asymptotics

CurveSource model_source(const ModelSpec& model, std::uint64_t seed) {
    auto sampler = std::make_shared<ModelSampler>(model);
    return [sampler, seed](std::uint64_t stream, std::uint64_t index, std::span<double> out) {
        sampler->draw_curve(derive_seed(seed, {stream}), index, out);
    };
}

CurveSource point_mass_source(Curve x) {
    return [x = std::move(x)](std::uint64_t, std::uint64_t, std::span<double> out) {
        if (out.size() != x.size()) throw DimensionError("point mass and output differ in length");
        std::copy(x.begin(), x.end(), out.begin());
    };
}

namespace {

/// Sup distances from x to curves [0, n) of `stream`, in index order.
std::vector<double> sup_distances(CurveView x, const CurveSource& source, std::uint64_t stream, std::size_t n,
                                  unsigned threads) {
    std::vector<double> out(n);
    constexpr std::size_t block = 1024;
    const std::size_t blocks = (n + block - 1) / block;
    parallel_for(blocks, threads, [&](std::size_t b) {
        Curve c(x.size());
        const std::size_t end = std::min(n, (b + 1) * block);
        for (std::size_t i = b * block; i < end; ++i) {
            source(stream, i, c);
            out[i] = sup_distance(x, c);
        }
    });
    return out;
}

}  // namespace

double mean_sup_distance(CurveView x, const CurveSource& source, std::uint64_t stream, std::size_t n,
                         unsigned threads) {
    if (n == 0) throw DomainError("need at least one draw");
    const auto d = sup_distances(x, source, stream, n, threads);
    return std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
}

double SllnTrace::max_deviation_from(std::size_t from) const {
    double out = 0.0;
    for (std::size_t k = 0; k < n.size(); ++k)
        if (n[k] >= from) out = std::max(out, deviation[k]);
    return out;
}

nlohmann::json SllnTrace::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["depth"] = depth;
    j["deviation"] = deviation;
    j["reference"] = reference;
    j["n_reference"] = n_reference;
    j["tolerance"] = tolerance;
    j["pass"] = pass;
    return j;
}

SllnTrace slln_check(CurveView x, const CurveSource& source, const std::vector<std::size_t>& n_schedule,
                     std::size_t n_reference, unsigned threads) {
    if (n_schedule.empty()) throw DomainError("empty n schedule");
    if (!std::is_sorted(n_schedule.begin(), n_schedule.end()) || n_schedule.front() == 0)
        throw DomainError("n schedule must be positive and increasing");
    const std::size_t n_max = std::max(n_reference, n_schedule.back());
    const auto d = sup_distances(x, source, 0, n_max, threads);

    SllnTrace trace;
    trace.n_reference = n_reference;
    double sum = 0.0;
    std::size_t used = 0;
    auto advance = [&](std::size_t to) {
        for (; used < to; ++used) sum += d[used];
        return 1.0 / (1.0 + sum / static_cast<double>(to));
    };
    std::vector<std::size_t> marks = n_schedule;
    for (std::size_t target : marks) trace.depth.push_back(advance(target));
    trace.reference = 1.0 / (1.0 + std::accumulate(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n_reference),
                                                   0.0) / static_cast<double>(n_reference));
    trace.n = n_schedule;
    for (double v : trace.depth) trace.deviation.push_back(std::abs(v - trace.reference));

    std::ptrdiff_t check = -1;
    for (std::size_t k = 0; k < trace.n.size(); ++k)
        if (trace.n[k] <= 10000) check = static_cast<std::ptrdiff_t>(k);
    trace.pass = check >= 0 && trace.deviation[static_cast<std::size_t>(check)] < trace.tolerance;
    return trace;
}

bool CltReport::pass() const {
    const double ratio = sd_ratio();
    return ratio >= 0.9 && ratio <= 1.1 && coverage >= 0.93 && coverage <= 0.97;
}

nlohmann::json CltReport::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["n_reps"] = n_reps;
    j["n_plugin"] = n_plugin;
    j["mu"] = mu;
    j["sigma"] = sigma;
    j["depth"] = depth;
    j["asymptotic_sd"] = asymptotic_sd;
    j["empirical_sd"] = empirical_sd;
    j["sd_ratio"] = sd_ratio();
    j["coverage"] = coverage;
    j["pass"] = pass();
    return j;
}

CltReport clt_check(CurveView x, const CurveSource& source, std::size_t n, std::size_t n_reps, std::size_t n_plugin,
                    unsigned threads) {
    if (n == 0 || n_reps < 2 || n_plugin < 2) throw DomainError("clt check needs n >= 1, n_reps >= 2, n_plugin >= 2");
    CltReport r;
    r.n = n;
    r.n_reps = n_reps;
    r.n_plugin = n_plugin;

    const auto d = sup_distances(x, source, 0, n_plugin, threads);
    r.mu = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n_plugin);
    double ss = 0.0;
    for (double v : d) ss += (v - r.mu) * (v - r.mu);
    r.sigma = std::sqrt(ss / static_cast<double>(n_plugin - 1));
    r.depth = 1.0 / (1.0 + r.mu);
    r.asymptotic_sd = r.sigma / ((1.0 + r.mu) * (1.0 + r.mu));

    std::vector<double> stat(n_reps);
    parallel_for(n_reps, threads, [&](std::size_t rep) {
        const double dn = 1.0 / (1.0 + mean_sup_distance(x, source, rep + 1, n, 1));
        stat[rep] = std::sqrt(static_cast<double>(n)) * (dn - r.depth);
    });
    const double mean = std::accumulate(stat.begin(), stat.end(), 0.0) / static_cast<double>(n_reps);
    double sv = 0.0;
    std::size_t covered = 0;
    for (double s : stat) {
        sv += (s - mean) * (s - mean);
        if (std::abs(s) <= 1.96 * r.asymptotic_sd) ++covered;
    }
    r.empirical_sd = std::sqrt(sv / static_cast<double>(n_reps - 1));
    r.coverage = static_cast<double>(covered) / static_cast<double>(n_reps);
    return r;
}

// ------------------------------------------------------------------ timing

BenchMethod bench_method(DepthKind kind, std::size_t n_proj) {
    DepthMethod m;
    m.kind = kind;
    m.n_proj = n_proj;
    m.seed = 1;
    return {display_name(kind), [m](const FunctionalDataset& ds) { (void)compute_depth(ds, m, 1); }};
}

BenchMethod bench_mbd_naive() {
    return {"MBD_NAIVE", [](const FunctionalDataset& ds) { (void)mbd_naive(ds); }};
}

double loglog_slope(std::span<const std::size_t> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DimensionError("slope needs equal-length series");
    if (x.size() < 2) throw DomainError("slope needs at least two points");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0 || !(y[i] > 0.0)) throw DomainError("log-log slope needs positive values");
        lx.push_back(std::log(static_cast<double>(x[i])));
        ly.push_back(std::log(y[i]));
    }
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("slope needs at least two distinct x values");
    return sxy / sxx;
}

const TimingSeries& TimingReport::at(const std::string& method) const {
    for (const auto& s : series)
        if (s.method == method) return s;
    throw DomainError("no timing series for " + method);
}

std::string TimingReport::to_csv() const {
    std::ostringstream out;
    out << "method,n,seconds\n";
    for (const auto& s : series)
        for (std::size_t k = 0; k < s.n.size(); ++k) out << s.method << ',' << s.n[k] << ',' << format_real(s.seconds[k]) << '\n';
    return out.str();
}

nlohmann::json TimingReport::to_json() const {
    nlohmann::json j;
    j["points"] = points;
    j["repeats"] = repeats;
    j["seed"] = seed;
    for (const auto& s : series) j["series"].push_back({{"method", s.method}, {"n", s.n}, {"seconds", s.seconds}, {"slope", s.slope}});
    return j;
}

TimingReport timing_bench(const std::vector<std::pair<BenchMethod, std::vector<std::size_t>>>& plan,
                          std::size_t points, std::uint64_t seed, std::size_t repeats) {
    if (repeats == 0) throw DomainError("need at least one timed repetition");
    std::size_t n_max = 0;
    for (const auto& [method, ns] : plan)
        for (std::size_t n : ns) n_max = std::max(n_max, n);
    if (n_max == 0) throw DomainError("empty timing plan");
    const FunctionalDataset pool = sample_gp(KernelSpec::exp_abs(), Grid::uniform(points), n_max, seed);

    TimingReport report;
    report.points = points;
    report.repeats = repeats;
    report.seed = seed;
    for (const auto& [method, ns] : plan) {
        TimingSeries series;
        series.method = method.name;
        for (std::size_t n : ns) {
            std::vector<std::size_t> rows(n);
            std::iota(rows.begin(), rows.end(), std::size_t{0});
            const FunctionalDataset ds = pool.subset(rows);
            method.run(ds);  // warm-up
            std::vector<double> t;
            for (std::size_t r = 0; r < repeats; ++r) {
                const auto start = std::chrono::steady_clock::now();
                method.run(ds);
                t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
            }
            std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2), t.end());
            series.n.push_back(n);
            series.seconds.push_back(t[t.size() / 2]);
        }
        if (series.n.size() >= 2) series.slope = loglog_slope(series.n, series.seconds);
        report.series.push_back(std::move(series));
    }
    return report;
}

}  // namespace fdd
