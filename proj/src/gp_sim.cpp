#include "fdd/gp_sim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdd {

KernelSpec KernelSpec::exp_pow(double mu2) {
    if (!(mu2 > 0.0 && mu2 < 2.0)) throw DomainError("exp_pow exponent must lie in (0, 2)");
    return {KernelFamily::ExpPower, mu2};
}

double KernelSpec::operator()(double s, double t) const {
    const double d = std::abs(t - s);
    switch (family) {
        case KernelFamily::ExpAbs: return std::exp(-d);
        case KernelFamily::ExpSquared: return std::exp(-d * d);
        case KernelFamily::ExpPower: return std::exp(-std::pow(d, exponent));
    }
    return 0.0;
}

std::string KernelSpec::describe() const {
    switch (family) {
        case KernelFamily::ExpAbs: return "exp_abs";
        case KernelFamily::ExpSquared: return "exp_sq";
        case KernelFamily::ExpPower: {
            std::ostringstream s;
            s << "exp_pow(" << exponent << ")";
            return s.str();
        }
    }
    return "?";
}

GaussianProcess::GaussianProcess(KernelSpec kernel, Grid grid) : kernel_(kernel), grid_(std::move(grid)) {
    const auto p = static_cast<Eigen::Index>(grid_.size());
    Eigen::MatrixXd cov(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = 0; b < p; ++b) cov(a, b) = kernel_(grid_[a], grid_[b]);

    for (double delta = 1e-12; delta <= 1e-6 * 1.0000001; delta *= 10.0) {
        Eigen::MatrixXd jittered = cov;
        jittered.diagonal().array() += delta;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        if (llt.info() != Eigen::Success) continue;
        const Eigen::MatrixXd lower = llt.matrixL();
        if (!lower.allFinite()) continue;
        jitter_ = delta;
        factor_.assign(static_cast<std::size_t>(p * p), 0.0);
        for (Eigen::Index a = 0; a < p; ++a)
            for (Eigen::Index b = 0; b <= a; ++b) factor_[static_cast<std::size_t>(a * p + b)] = lower(a, b);
        return;
    }
    throw NumericalError("covariance factorization failed for kernel " + kernel_.describe() +
                         " even with jitter 1e-6");
}

void GaussianProcess::transform(std::span<const double> z, std::span<double> out) const {
    const std::size_t p = grid_.size();
    if (z.size() != p || out.size() != p) throw DimensionError("GaussianProcess::transform: wrong vector length");
    for (std::size_t a = 0; a < p; ++a) {
        double s = 0.0;
        const double* row = &factor_[a * p];
        for (std::size_t b = 0; b <= a; ++b) s += row[b] * z[b];
        out[a] = s;
    }
}

Curve GaussianProcess::sample(Rng& rng) const {
    std::normal_distribution<double> normal;
    Curve z(grid_.size()), out(grid_.size());
    for (auto& v : z) v = normal(rng);
    transform(z, out);
    return out;
}

FunctionalDataset sample_gp(const KernelSpec& kernel, const Grid& grid, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("sample_gp: n must be at least 1");
    const GaussianProcess gp(kernel, grid);
    const std::size_t p = grid.size();
    std::vector<double> values(n * p);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = make_rng(seed, {i});
        const auto c = gp.sample(rng);
        std::copy(c.begin(), c.end(), values.begin() + static_cast<std::ptrdiff_t>(i * p));
    }
    return FunctionalDataset(grid, std::move(values));
}

// ------------------------------------------------------------------ models

std::string to_string(ModelId id) { return "M" + std::to_string(static_cast<int>(id)); }

ModelId parse_model_id(const std::string& token) {
    if (token.size() == 2 && (token[0] == 'M' || token[0] == 'm') && token[1] >= '0' && token[1] <= '9')
        return static_cast<ModelId>(token[1] - '0');
    throw DomainError("unknown model '" + token + "' (expected M0..M9)");
}

bool is_shape_model(ModelId id) { return static_cast<int>(id) >= 5; }

ModelSpec ModelSpec::preset(ModelId id, double magnitude) {
    ModelSpec s;
    s.id = id;
    s.magnitude = magnitude;
    if (is_shape_model(id)) {
        s.q = 0.15;
        s.mean = (id == ModelId::M7 || id == ModelId::M8) ? MeanFunction::Quadratic
                 : id == ModelId::M9                        ? MeanFunction::Cubic
                                                            : MeanFunction::Linear;
        s.roughness = (id == ModelId::M5 || id == ModelId::M7) ? 0.2 : 0.1;
    }
    return s;
}

void ModelSpec::validate() const {
    if (!(q >= 0.0 && q < 1.0)) throw DomainError("contamination probability q must lie in [0, 1)");
    if (!(magnitude > 0.0)) throw DomainError("contamination magnitude M must be positive");
    if (!(peak_width > 0.0)) throw DomainError("peak width l must be positive");
    if (is_shape_model(id) && !(roughness > 0.0 && roughness < 2.0))
        throw DomainError("roughness mu2 must lie in (0, 2)");
    if (n == 0) throw DomainError("sample size must be at least 1");
}

Curve ModelSpec::truth() const {
    Curve f(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        switch (mean) {
            case MeanFunction::Linear: f[k] = 4.0 * t; break;
            case MeanFunction::Quadratic: f[k] = 4.0 * t * t; break;
            case MeanFunction::Cubic: f[k] = 4.0 * t * t * t; break;
        }
    }
    return f;
}

KernelSpec ModelSpec::base_kernel() const { return is_shape_model(id) ? KernelSpec::exp_sq() : KernelSpec::exp_abs(); }

std::optional<KernelSpec> ModelSpec::outlier_kernel() const {
    if (!is_shape_model(id)) return std::nullopt;
    return KernelSpec::exp_pow(roughness);
}

ModelSampler::ModelSampler(ModelSpec spec)
    : spec_((spec.validate(), std::move(spec))), truth_(spec_.truth()), base_(spec_.base_kernel(), spec_.grid) {
    if (auto k = spec_.outlier_kernel()) outlier_.emplace(*k, spec_.grid);
}

bool ModelSampler::draw_curve(std::uint64_t seed, std::size_t i, std::span<double> out,
                              std::optional<bool> forced) const {
    const std::size_t p = spec_.grid.size();
    if (out.size() != p) throw DimensionError("output curve length does not match the model grid");
    // Fixed draw order per curve, independent of model and q.
    Rng rng = make_rng(seed, {i});
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Curve z1(p), z2(p), e(p);
    for (auto& v : z1) v = normal(rng);
    for (auto& v : z2) v = normal(rng);
    const double u_eps = unif(rng);
    const double u_sign = unif(rng);
    const double onset = unif(rng);

    // M0 has no contamination component.
    const bool eps = spec_.id != ModelId::M0 && (forced ? *forced : u_eps < spec_.q);
    const double sign = u_sign < 0.5 ? -1.0 : 1.0;

    if (is_shape_model(spec_.id)) {
        if (eps) {
            outlier_->transform(z2, e);
        } else {
            base_.transform(z1, e);
        }
        for (std::size_t k = 0; k < p; ++k) out[k] = truth_[k] + e[k];
        return eps;
    }

    base_.transform(z1, e);
    for (std::size_t k = 0; k < p; ++k) {
        const double t = spec_.grid[k];
        double shift = 0.0;
        if (eps) {
            switch (spec_.id) {
                case ModelId::M1: shift = spec_.magnitude; break;
                case ModelId::M2: shift = sign * spec_.magnitude; break;
                case ModelId::M3: shift = t >= onset ? sign * spec_.magnitude : 0.0; break;
                case ModelId::M4:
                    shift = (t >= onset && t <= onset + spec_.peak_width) ? sign * spec_.magnitude : 0.0;
                    break;
                default: break;
            }
        }
        out[k] = truth_[k] + e[k] + shift;
    }
    return eps;
}

SimulatedSample ModelSampler::generate(std::uint64_t seed, const std::vector<bool>* forced) const {
    const std::size_t n = spec_.n;
    const std::size_t p = spec_.grid.size();
    if (forced && forced->size() != n) throw DimensionError("forced outlier flags must have one entry per curve");
    std::vector<double> values(n * p);
    std::vector<bool> flags(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::optional<bool> f;
        if (forced) f = (*forced)[i];
        flags[i] = draw_curve(seed, i, std::span<double>(values.data() + i * p, p), f);
    }
    return {FunctionalDataset(spec_.grid, std::move(values)), truth_, std::move(flags)};
}

SimulatedSample generate(const ModelSpec& model, std::uint64_t seed) { return ModelSampler(model).generate(seed); }

}  // namespace fdd
