#include "covcast/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace covcast {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

} // namespace

GaussianNll diagonal_gaussian_nll(const VectorXd& z, const VectorXd& mean, const VectorXd& variance)
{
    const Index m = z.size();
    if (mean.size() != m || variance.size() != m) {
        throw std::invalid_argument("diagonal_gaussian_nll: size mismatch");
    }
    GaussianNll out;
    out.d_mean.resize(m);
    out.d_variance.resize(m);
    out.d_factor.resize(m, 0);
    double value = 0.0;
    for (Index i = 0; i < m; ++i) {
        const double e = z(i) - mean(i);
        const double alpha = e / variance(i);
        value += kLog2Pi + std::log(variance(i)) + e * alpha;
        out.d_mean(i) = -alpha;
        out.d_variance(i) = 0.5 * (1.0 / variance(i) - alpha * alpha);
    }
    out.value = 0.5 * value;
    return out;
}

GaussianNll lowrank_gaussian_nll(const VectorXd& z, const VectorXd& mean, const VectorXd& variance,
                                 const MatrixXd& factor)
{
    const Index m = z.size();
    const Index r = factor.cols();
    if (mean.size() != m || variance.size() != m || factor.rows() != m) {
        throw std::invalid_argument("lowrank_gaussian_nll: size mismatch");
    }
    const VectorXd inv_d = variance.cwiseInverse();
    const MatrixXd a = inv_d.asDiagonal() * factor;             // D⁻¹F
    MatrixXd cap = MatrixXd::Identity(r, r) + factor.transpose() * a; // I + FᵀD⁻¹F
    const Eigen::LLT<MatrixXd> llt(cap);
    if (r > 0 && llt.info() != Eigen::Success) {
        throw std::runtime_error("lowrank_gaussian_nll: capacitance not positive definite");
    }
    const VectorXd e = z - mean;
    VectorXd alpha = inv_d.cwiseProduct(e);
    MatrixXd a_cinv(m, r);
    double log_det_cap = 0.0;
    if (r > 0) {
        alpha -= a * llt.solve(a.transpose() * e);
        a_cinv = llt.solve(a.transpose()).transpose();
        log_det_cap = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }

    GaussianNll out;
    double value = 0.0;
    out.d_mean = -alpha;
    out.d_variance.resize(m);
    for (Index i = 0; i < m; ++i) {
        value += kLog2Pi + std::log(variance(i)) + e(i) * alpha(i);
        double inv_ii = inv_d(i);
        if (r > 0) {
            inv_ii -= a_cinv.row(i).dot(a.row(i));
        }
        out.d_variance(i) = 0.5 * (inv_ii - alpha(i) * alpha(i));
    }
    out.value = 0.5 * (value + log_det_cap);
    if (r > 0) {
        out.d_factor = a_cinv - alpha * (alpha.transpose() * factor);
    } else {
        out.d_factor.resize(m, 0);
    }
    return out;
}

VectorXd sample_lowrank_gaussian(const VectorXd& mean, const VectorXd& variance,
                                 const MatrixXd& factor, Rng& rng)
{
    VectorXd out = mean;
    for (Index i = 0; i < mean.size(); ++i) {
        out(i) += std::sqrt(variance(i)) * rng.normal();
    }
    for (Index k = 0; k < factor.cols(); ++k) {
        out += factor.col(k) * rng.normal();
    }
    return out;
}

} // namespace covcast
