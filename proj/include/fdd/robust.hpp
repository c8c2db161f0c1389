#ifndef FDD_ROBUST_HPP
#define FDD_ROBUST_HPP

/**
 * @file robust.hpp
 * @brief Depth-trimmed means, integrated squared error and the Monte Carlo
 *        benchmarks built on them (MISE tables and outlier detection rates).
 */

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdd/core.hpp"
#include "fdd/depths.hpp"
#include "fdd/gp_sim.hpp"

namespace fdd {

struct TrimSpec {
    double alpha = 0.2;  ///< fraction of least deep curves removed, 0 <= alpha < 1
    void validate() const;
};

Curve pointwise_mean(const FunctionalDataset& ds);
/// Even counts take the midpoint of the two central order statistics.
Curve pointwise_median(const FunctionalDataset& ds);

/// Mean of the curves whose rank exceeds n * alpha. The number of kept curves
/// equals ceil(n (1 - alpha)), which is also the divisor; alpha = 0 gives
/// pointwise_mean exactly.
Curve trimmed_mean(const FunctionalDataset& ds, const DepthVector& depth, TrimSpec trim, std::uint64_t tie_seed);

/// Integrated squared error on the {k/L} evaluation grid, approximated by the
/// Riemann sum L^-1 sum_k (estimate_k - truth_k)^2.
double ise(CurveView estimate, CurveView truth);

enum class EstimatorKind { Mean, Median, Trimmed };

struct Estimator {
    EstimatorKind kind = EstimatorKind::Mean;
    DepthKind depth = DepthKind::Linf;  ///< used when kind == Trimmed

    static Estimator mean() { return {EstimatorKind::Mean, DepthKind::Linf}; }
    static Estimator median() { return {EstimatorKind::Median, DepthKind::Linf}; }
    static Estimator trimmed(DepthKind d) { return {EstimatorKind::Trimmed, d}; }

    /// MEAN, MED, BD, MBD, HRD, MHRD, RTD, SPATD, LINFD.
    static std::vector<Estimator> standard_set();
    static Estimator parse(const std::string& token);

    std::string name() const;
};

/// Table of (row x column) cells, each an average over replicates with its
/// standard error. Rows are estimators or depth methods, columns are models.
struct ExperimentReport {
    std::string metric;  ///< "mise" or "detection_rate"
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    struct Cell {
        double value = 0.0;
        double se = 0.0;
        std::size_t n_reps = 0;
    };
    std::vector<std::vector<Cell>> cells;  ///< cells[row][column]
    nlohmann::json metadata;

    const Cell& at(const std::string& row, const std::string& column) const;

    /// Header `estimator,<columns...>`, one row per estimator, cells "value (se)".
    std::string to_csv(int precision = 4) const;
    nlohmann::json to_json() const;
};

nlohmann::json to_json(const ModelSpec& spec);

struct MiseConfig {
    std::vector<ModelSpec> models;
    std::vector<Estimator> estimators = Estimator::standard_set();
    std::size_t n_reps = 200;
    std::uint64_t seed = 1;
    TrimSpec trim{};
    std::size_t n_proj = 250;
    unsigned threads = 1;
};

/// For each replicate one dataset per model is drawn, seeded by (seed, model
/// id, replicate); every estimator is evaluated on that same dataset.
ExperimentReport mise_experiment(const MiseConfig& config);

/// How the planted curve's rank is read off the depths.
enum class DetectionRank {
    Counting,    ///< r_i = #{j : D_j <= D_i}; a tie block takes its largest rank
    RandomTies,  ///< rank_curves with a seeded tie order
};

struct DetectionConfig {
    std::vector<ModelSpec> models;  ///< shape models M5-M9
    std::vector<DepthKind> methods{DepthKind::Band3, DepthKind::ModifiedBand2, DepthKind::HalfRegion,
                                   DepthKind::ModifiedHalfRegion, DepthKind::RandomTukey, DepthKind::Spatial,
                                   DepthKind::Linf};
    std::size_t n_reps = 200;
    std::uint64_t seed = 1;
    double fraction = 0.2;  ///< detected when rank <= n * fraction
    std::size_t n_proj = 250;
    unsigned threads = 1;
    /// Extra constant added to the planted curve (0 for the standard experiment).
    double outlier_shift = 0.0;
    DetectionRank ranking = DetectionRank::Counting;
};

/// Each replicate has n - 1 clean curves and one curve (the last) forced to
/// come from the outlier process. Reports the fraction of replicates where
/// that curve ranks among the least deep. With the default counting rank a
/// planted curve tied with many others at the minimum depth is not counted as
/// detected unless the whole tie block fits in the least deep fraction.
ExperimentReport detection_experiment(const DetectionConfig& config);

}  // namespace fdd

#endif  // FDD_ROBUST_HPP
