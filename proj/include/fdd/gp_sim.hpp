#ifndef FDD_GP_SIM_HPP
#define FDD_GP_SIM_HPP

/**
 * @file gp_sim.hpp
 * @brief Gaussian-process sampling on a grid and the contamination models M0-M9.
 *
 * Magnitude models (M0-M4) perturb f(t) = 4t + e(t), cov e = exp(-|t-s|):
 *   M0  Y = X
 *   M1  Y = X + eps M
 *   M2  Y = X + eps sigma M
 *   M3  Y = X + eps sigma M    for t >= T, X otherwise
 *   M4  Y = X + eps sigma M    for t in [T, T + l], X otherwise
 * Shape models (M5-M9) mix a smooth base process (cov exp(-|t-s|^2)) with a
 * rough outlier process (cov exp(-|t-s|^mu2)) around a shared mean:
 *   Z = (1 - eps) (f + e1) + eps (f + e2).
 * eps ~ Bern(q), sigma = +-1, T ~ U(0,1), all drawn per curve.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fdd/core.hpp"
#include "fdd/rng.hpp"

namespace fdd {

enum class KernelFamily { ExpAbs, ExpSquared, ExpPower };

struct KernelSpec {
    KernelFamily family = KernelFamily::ExpAbs;
    double exponent = 1.0;  ///< mu2 for ExpPower, 0 < mu2 < 2

    static KernelSpec exp_abs() { return {KernelFamily::ExpAbs, 1.0}; }
    static KernelSpec exp_sq() { return {KernelFamily::ExpSquared, 2.0}; }
    static KernelSpec exp_pow(double mu2);

    double operator()(double s, double t) const;
    std::string describe() const;
};

/// Zero-mean Gaussian process on a fixed grid, backed by a lower-triangular
/// factor of the covariance matrix. Diagonal jitter starts at 1e-12 and grows
/// tenfold until the factorization succeeds, up to 1e-6.
class GaussianProcess {
public:
    GaussianProcess(KernelSpec kernel, Grid grid);

    const Grid& grid() const noexcept { return grid_; }
    const KernelSpec& kernel() const noexcept { return kernel_; }
    double jitter() const noexcept { return jitter_; }

    /// out = L z for the given standard-normal vector z.
    void transform(std::span<const double> z, std::span<double> out) const;
    /// One draw using `rng`.
    Curve sample(Rng& rng) const;

private:
    KernelSpec kernel_;
    Grid grid_;
    double jitter_ = 0.0;
    std::vector<double> factor_;  // p x p, row-major, lower triangular
};

/// n i.i.d. draws; curve i uses the substream derived from (seed, i).
FunctionalDataset sample_gp(const KernelSpec& kernel, const Grid& grid, std::size_t n, std::uint64_t seed);

enum class ModelId { M0, M1, M2, M3, M4, M5, M6, M7, M8, M9 };
enum class MeanFunction { Linear, Quadratic, Cubic };  ///< 4t, 4t^2, 4t^3

std::string to_string(ModelId id);
ModelId parse_model_id(const std::string& token);
bool is_shape_model(ModelId id);

struct ModelSpec {
    ModelId id = ModelId::M0;
    MeanFunction mean = MeanFunction::Linear;
    double magnitude = 5.0;           ///< M
    double q = 0.1;                   ///< contamination probability
    double peak_width = 2.0 / 30.0;   ///< l, M4 only
    double roughness = 0.2;           ///< mu2, M5-M9
    Grid grid = Grid::uniform(30);    ///< {k/30}, k = 1..30
    std::size_t n = 50;

    /// Defaults for `id`: q = 0.1 for M0-M4, q = 0.15 for M5-M9, the model's
    /// mean function and mu2 (0.2 for M5/M7, 0.1 for M6/M8/M9).
    static ModelSpec preset(ModelId id, double magnitude = 5.0);

    void validate() const;
    Curve truth() const;
    KernelSpec base_kernel() const;
    std::optional<KernelSpec> outlier_kernel() const;
};

struct SimulatedSample {
    FunctionalDataset data;
    Curve truth;
    std::vector<bool> outliers;  ///< eps_i
};

/// Reusable sampler for one model: covariance factors are computed once.
class ModelSampler {
public:
    explicit ModelSampler(ModelSpec spec);

    const ModelSpec& spec() const noexcept { return spec_; }

    /// Draws spec.n curves. When `forced` is given, eps_i = forced[i]; every
    /// other per-curve draw is unchanged, so forcing a flag only swaps that
    /// curve between its clean and contaminated versions.
    SimulatedSample generate(std::uint64_t seed, const std::vector<bool>* forced = nullptr) const;

    /// Curve i of the sample seeded by `seed`, written to `out`; returns eps_i.
    /// generate() is exactly this for i = 0..n-1, so streams of any length can
    /// be drawn without materializing a dataset.
    bool draw_curve(std::uint64_t seed, std::size_t i, std::span<double> out,
                    std::optional<bool> forced = std::nullopt) const;

private:
    ModelSpec spec_;
    Curve truth_;
    GaussianProcess base_;
    std::optional<GaussianProcess> outlier_;
};

SimulatedSample generate(const ModelSpec& model, std::uint64_t seed);

}  // namespace fdd

#endif  // FDD_GP_SIM_HPP
