#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace covcast {

/// Φ⁻¹ ∘ F̂ for one series, with F̂ the empirical CDF of the fitting sample.
/// A sample value of rank r (1-based, mid-rank for ties) maps to
/// Φ⁻¹((r - 0.5)/n); values in between interpolate linearly in rank space and
/// values outside the sample clamp to the extreme ranks. The inverse walks the
/// same path backwards, so training points round-trip.
class MarginalTransform {
public:
    MarginalTransform() = default;

    /// Constant samples (or fewer than two points) give an identity transform.
    static MarginalTransform fit(std::span<const double> sample);

    bool identity() const { return sorted_.empty(); }
    double forward(double x) const;
    double inverse(double z) const;

private:
    std::vector<double> sorted_;
};

/// Per-column preprocessing shared by the probabilistic forecasters: optional
/// mean scaling x / (1 + mean|x|) followed by an optional marginal transform,
/// both fitted on the training rows only.
class SeriesTransform {
public:
    SeriesTransform() = default;
    SeriesTransform(const Eigen::MatrixXd& training, bool scaling, bool copula);

    Eigen::MatrixXd forward(const Eigen::MatrixXd& values) const;
    double inverse(double z, std::size_t column) const;
    const Eigen::VectorXd& scales() const { return scales_; }
    /// Columns whose marginal transform fell back to identity.
    std::size_t bypassed() const { return bypassed_; }

private:
    Eigen::VectorXd scales_;
    std::vector<MarginalTransform> marginals_;
    std::size_t bypassed_ = 0;
};

} // namespace covcast
