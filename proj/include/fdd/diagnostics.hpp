#ifndef FDD_DIAGNOSTICS_HPP
#define FDD_DIAGNOSTICS_HPP

/**
 * @file diagnostics.hpp
 * @brief Rank-rank stability, empirical checks of the L-infinity depth's
 *        asymptotics, and timing of the depth routines.
 */

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fdd/core.hpp"
#include "fdd/depths.hpp"
#include "fdd/gp_sim.hpp"

namespace fdd {

/// Pearson correlation of the two rank sequences. Throws DimensionError on
/// length mismatch and DomainError when either sequence is constant.
double spearman(std::span<const std::size_t> a, std::span<const std::size_t> b);
double spearman(std::span<const double> a, std::span<const double> b);

// --------------------------------------------------------------- rank-rank

struct RankRankReport {
    DepthMethod method;
    std::uint64_t split_seed = 0;
    std::uint64_t tie_seed = 0;
    std::vector<std::size_t> first_half;  ///< dataset rows forming x1
    /// (in-sample rank within x1, rank of the same curve against x2)
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    double spearman = 0.0;

    /// Header `label,rank_in_sample,rank_cross`.
    std::string to_csv(const FunctionalDataset& ds) const;
    nlohmann::json to_json() const;
};

/// Splits the rows into x1 (first floor(n/2) of a seeded permutation) and x2
/// (the rest); ranks x1 against itself and against x2 with the same method.
RankRankReport rank_rank(const FunctionalDataset& ds, const DepthMethod& method, std::uint64_t split_seed,
                         std::uint64_t tie_seed, unsigned threads = 1);

/// Cross ranks divided by floor(n/2) of the k curves with the highest
/// in-sample ranks, sorted ascending. Values near 1 mean the deepest curves
/// stay deepest against an independent reference sample.
std::vector<double> deepest_stability(const RankRankReport& report, std::size_t k);
std::vector<double> deepest_stability(const FunctionalDataset& ds, const DepthMethod& method, std::size_t k,
                                      std::uint64_t split_seed, std::uint64_t tie_seed, unsigned threads = 1);

/// Minimal SVG scatter of a rank-rank report with the identity line.
std::string rank_rank_svg(const RankRankReport& report, const std::string& title = {});

// ------------------------------------------------------------- asymptotics

/// Curve i of stream s of some distribution P; writes into `out`. Must be a
/// pure function of (stream, index) so results do not depend on threads.
using CurveSource = std::function<void(std::uint64_t stream, std::uint64_t index, std::span<double> out)>;

/// Draws from a simulation model: stream s uses the substream (seed, s).
CurveSource model_source(const ModelSpec& model, std::uint64_t seed);
/// Point mass at x.
CurveSource point_mass_source(Curve x);

/// Mean of sup distances from x to curves 0..n-1 of stream `stream`.
double mean_sup_distance(CurveView x, const CurveSource& source, std::uint64_t stream, std::size_t n,
                         unsigned threads = 1);

struct SllnTrace {
    std::vector<std::size_t> n;
    std::vector<double> depth;      ///< L-infinity depth of x against the first n draws
    std::vector<double> deviation;  ///< |depth - reference|
    double reference = 0.0;         ///< depth against n_reference draws
    std::size_t n_reference = 0;
    bool pass = false;              ///< deviation at the largest n <= 10^4 below tolerance
    double tolerance = 0.005;

    /// Largest deviation over schedule entries with n >= from.
    double max_deviation_from(std::size_t from) const;
    nlohmann::json to_json() const;
};

/// Nested draws (the first n of one stream) so the trace is one sample path.
SllnTrace slln_check(CurveView x, const CurveSource& source, const std::vector<std::size_t>& n_schedule,
                     std::size_t n_reference, unsigned threads = 1);

struct CltReport {
    std::size_t n = 0;
    std::size_t n_reps = 0;
    std::size_t n_plugin = 0;
    double mu = 0.0;             ///< plug-in E||x - X||_inf
    double sigma = 0.0;          ///< plug-in sd of ||x - X||_inf
    double depth = 0.0;          ///< plug-in (1 + mu)^-1
    double asymptotic_sd = 0.0;  ///< sigma (1 + mu)^-2
    double empirical_sd = 0.0;   ///< sd of sqrt(n) (D_n - depth) over replicates
    double coverage = 0.0;       ///< fraction of replicates within 1.96 asymptotic sd
    double sd_ratio() const { return asymptotic_sd > 0.0 ? empirical_sd / asymptotic_sd : 1.0; }
    /// sd within 10% and coverage in [0.93, 0.97].
    bool pass() const;
    nlohmann::json to_json() const;
};

/// Plug-in moments from stream 0 (n_plugin draws); replicate r uses stream r + 1.
CltReport clt_check(CurveView x, const CurveSource& source, std::size_t n, std::size_t n_reps,
                    std::size_t n_plugin = 100000, unsigned threads = 1);

// ------------------------------------------------------------------ timing

struct BenchMethod {
    std::string name;
    std::function<void(const FunctionalDataset&)> run;
};

/// In-sample computation of `kind` (MBD uses the fast route).
BenchMethod bench_method(DepthKind kind, std::size_t n_proj = 250);
BenchMethod bench_mbd_naive();

struct TimingSeries {
    std::string method;
    std::vector<std::size_t> n;
    std::vector<double> seconds;  ///< median of the timed repetitions
    double slope = 0.0;           ///< least-squares slope of log(seconds) on log(n)
};

struct TimingReport {
    std::size_t points = 0;
    std::size_t repeats = 0;
    std::uint64_t seed = 0;
    std::vector<TimingSeries> series;

    const TimingSeries& at(const std::string& method) const;
    std::string to_csv() const;  ///< method,n,seconds
    nlohmann::json to_json() const;
};

/// Least-squares slope of log(y) on log(x).
double loglog_slope(std::span<const std::size_t> x, std::span<const double> y);

/// Times each method single-threaded on exp-abs GP samples with `points` grid
/// points: one untimed warm-up, then the median of `repeats` runs per n.
TimingReport timing_bench(const std::vector<std::pair<BenchMethod, std::vector<std::size_t>>>& plan,
                          std::size_t points, std::uint64_t seed, std::size_t repeats = 3);

}  // namespace fdd

#endif  // FDD_DIAGNOSTICS_HPP
