#ifndef FDD_LIGHTCURVE_HPP
#define FDD_LIGHTCURVE_HPP

/**
 * @file lightcurve.hpp
 * @brief Periodic light-curve preprocessing and a synthetic light-curve generator.
 *
 * Pipeline per star: fold on the known period and subtract the mean magnitude,
 * least-squares fit a natural cubic spline with equally spaced knots on [0, 1]
 * (boundary knots at phases 0 and 1; periodicity is not enforced), evaluate on
 * the shared phase grid {k/G}, shift circularly so the minimum magnitude sits
 * at phase 0, and re-center the sampled curve to zero mean.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "fdd/core.hpp"

namespace fdd {

struct Observation {
    double time = 0.0;  ///< days
    double mag = 0.0;
};

struct RawLightCurve {
    std::string star_id;
    double period = 1.0;  ///< days
    std::vector<Observation> observations;

    void validate() const;
};

struct FoldedCurve {
    std::vector<double> phases;      ///< in [0, 1)
    std::vector<double> magnitudes;  ///< mean-subtracted
};

FoldedCurve fold(const RawLightCurve& lc);

/// Natural cubic spline space on equally spaced knots over [0, 1], in the
/// truncated-power basis N_1 = 1, N_2 = x, N_{k+2} = d_k - d_{K-1} with
/// d_k(x) = ((x - xi_k)^3_+ - (x - xi_K)^3_+) / (xi_K - xi_k).
class NaturalSplineBasis {
public:
    explicit NaturalSplineBasis(std::size_t knots = 15);

    std::size_t size() const noexcept { return knots_.size(); }
    const std::vector<double>& knots() const noexcept { return knots_; }
    /// Values of all basis functions at x.
    std::vector<double> evaluate(double x) const;

private:
    std::vector<double> knots_;
};

/// Least-squares natural cubic spline fit, evaluated on `grid`.
/// Throws NumericalError naming `star_id` when the design is rank deficient
/// or has fewer distinct phases than basis functions.
Curve smooth(const FoldedCurve& fc, const Grid& grid, std::size_t knots = 15, const std::string& star_id = "");

/// Circular shift so the first minimum moves to index 0.
Curve align_phase(CurveView c);

/// {k / size : k = 0..size-1}.
Grid phase_grid(std::size_t size = 100);

struct PrepOptions {
    std::size_t knots = 15;
    std::size_t grid_size = 100;
    unsigned threads = 1;
};

/// fold -> smooth -> align -> re-center, one row per star (labels = star ids).
Curve preprocess_one(const RawLightCurve& lc, const Grid& grid, std::size_t knots);
FunctionalDataset preprocess(const std::vector<RawLightCurve>& stars, const PrepOptions& options = {});

/// Manifest CSV `star_id,period,path`; paths are relative to the manifest's
/// directory. Each star file is CSV `time,mag`.
std::vector<RawLightCurve> load_manifest(const std::string& manifest_path);
RawLightCurve load_light_curve(const std::string& path, const std::string& star_id, double period);
/// Writes one `time,mag` file per star into `dir` plus `dir/manifest.csv`.
void save_light_curves(const std::vector<RawLightCurve>& stars, const std::string& dir);

// ----------------------------------------------------------- synthetic data

enum class LightCurveKind { Inlier, AmplitudeInflated, AmplitudeDeflated, PhaseShifted };

struct OutlierSpec {
    double inflated = 0.015;  ///< fraction of curves with inflated amplitude
    double deflated = 0.015;  ///< fraction of smooth low-amplitude curves
    double shifted = 0.015;   ///< fraction of curves shifted in phase by 0.25
};

struct SyntheticLightCurves {
    FunctionalDataset data;
    std::vector<LightCurveKind> kinds;

    std::vector<bool> outlier_flags() const;
};

/// Mean-zero template on `grid` with its minimum at phase 0.
Curve lightcurve_template(const Grid& grid);

/// Sawtooth-like template times a per-curve amplitude plus a rough periodic
/// Gaussian perturbation, on phase_grid(100). Outlier counts are
/// round(fraction * n) per family; their positions are random.
SyntheticLightCurves synth_lightcurves(std::size_t n, const OutlierSpec& outliers, std::uint64_t seed);

/// Unfolded photometry of template-shaped stars for exercising the pipeline:
/// random periods, `observations` irregular epochs, random phase offset and
/// mean magnitude, Gaussian photometric noise with sd `noise`.
std::vector<RawLightCurve> synth_raw_lightcurves(std::size_t n, std::uint64_t seed, std::size_t observations = 120,
                                                 double noise = 0.02);

}  // namespace fdd

#endif  // FDD_LIGHTCURVE_HPP
