#include "covcast/estimators.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string_view>
#include <utility>

#include <fmt/format.h>

#include "covcast/kernels.hpp"

namespace covcast {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::array<std::pair<EstimatorKind, const char*>, 7> kNames{{
    {EstimatorKind::Sample, "Sample"},
    {EstimatorKind::SemiCov, "SemiCov"},
    {EstimatorKind::Ewma, "Ewma"},
    {EstimatorKind::ShrinkConstVar, "ShrinkConstVar"},
    {EstimatorKind::ShrinkSingleFactor, "ShrinkSingleFactor"},
    {EstimatorKind::ShrinkConstCorr, "ShrinkConstCorr"},
    {EstimatorKind::OracleApprox, "OracleApprox"},
}};

void require_rows(const MatrixXd& window, Index min_rows, const char* who)
{
    if (window.rows() < min_rows || window.cols() < 1) {
        throw std::invalid_argument(fmt::format("{}: need at least {} observations of >= 1 asset, got {}x{}",
                                                who, min_rows, window.rows(), window.cols()));
    }
}

MatrixXd symmetrize(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Population (1/t) moments of the centered window, as used by the
// Ledoit-Wolf intensity estimators.
struct Centered {
    MatrixXd x;
    MatrixXd sample;
    double t;
};

Centered centered_moments(const MatrixXd& window)
{
    Centered c;
    c.x = kernels::center_columns(window);
    c.t = static_cast<double>(window.rows());
    c.sample = kernels::cross_product_parallel(c.x) / c.t;
    return c;
}

double intensity_const_var(const MatrixXd& window)
{
    const auto [x, s, t] = centered_moments(window);
    const Index n = s.rows();
    const double mu = s.trace() / static_cast<double>(n);
    const double d2 = (s - mu * MatrixXd::Identity(n, n)).squaredNorm();
    if (d2 <= 0.0) {
        return 0.0;
    }
    double b2 = 0.0;
    for (Index k = 0; k < x.rows(); ++k) {
        const VectorXd xk = x.row(k).transpose();
        b2 += (xk * xk.transpose() - s).squaredNorm();
    }
    b2 /= t * t;
    return std::clamp(std::min(b2, d2) / d2, 0.0, 1.0);
}

double intensity_single_factor(const MatrixXd& window)
{
    const auto [x, sample, t] = centered_moments(window);
    const Index n = sample.rows();
    const VectorXd mkt = x.rowwise().mean();
    const VectorXd cov_mkt = x.transpose() * mkt / t;
    const double var_mkt = mkt.squaredNorm() / t;
    if (var_mkt <= 0.0) {
        return 0.0;
    }
    MatrixXd prior = cov_mkt * cov_mkt.transpose() / var_mkt;
    prior.diagonal() = sample.diagonal();
    const double c = (sample - prior).squaredNorm();
    if (c <= 0.0) {
        return 0.0;
    }
    const MatrixXd y = x.array().square().matrix();
    const double p = (y.transpose() * y).sum() / t - sample.squaredNorm();
    const double r_diag = y.array().square().sum() / t - sample.diagonal().squaredNorm();
    const MatrixXd z = x.array().colwise() * mkt.array();

    MatrixXd v1 = y.transpose() * z / t;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            v1(i, j) -= cov_mkt(i) * sample(i, j);
        }
    }
    double r_off1 = 0.0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            r_off1 += v1(i, j) * cov_mkt(j);
        }
        r_off1 -= v1(i, i) * cov_mkt(i);
    }
    r_off1 /= var_mkt;

    const MatrixXd v3 = z.transpose() * z / t - var_mkt * sample;
    const MatrixXd outer = cov_mkt * cov_mkt.transpose();
    double r_off3 = v3.cwiseProduct(outer).sum();
    for (Index i = 0; i < n; ++i) {
        r_off3 -= v3(i, i) * cov_mkt(i) * cov_mkt(i);
    }
    r_off3 /= var_mkt * var_mkt;

    const double r = r_diag + 2.0 * r_off1 - r_off3;
    const double kappa = (p - r) / c;
    return std::clamp(kappa / t, 0.0, 1.0);
}

double mean_correlation(const MatrixXd& cov)
{
    const Index n = cov.rows();
    double sum = 0.0;
    std::size_t count = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < i; ++j) {
            const double denom = std::sqrt(cov(i, i) * cov(j, j));
            if (denom > 0.0) {
                sum += cov(i, j) / denom;
                ++count;
            }
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double intensity_const_corr(const MatrixXd& window)
{
    const auto [x, sample, t] = centered_moments(window);
    const Index n = sample.rows();
    if (n < 2) {
        return 0.0;
    }
    const VectorXd var = sample.diagonal();
    const VectorXd sd = var.cwiseSqrt();
    const double r_bar = mean_correlation(sample);
    MatrixXd prior = r_bar * sd * sd.transpose();
    prior.diagonal() = var;
    const double gamma = (sample - prior).squaredNorm();
    if (gamma <= 0.0) {
        return 0.0;
    }
    const MatrixXd y = x.array().square().matrix();
    const MatrixXd xtx = x.transpose() * x;
    const MatrixXd phi_mat =
        (y.transpose() * y / t).array() - 2.0 * xtx.array() * sample.array() / t +
        sample.array().square();
    const double phi = phi_mat.sum();

    const MatrixXd cubes = x.array().cube().matrix();
    MatrixXd theta = cubes.transpose() * x / t;
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            theta(i, j) -= var(i) * sample(i, j);
        }
        theta(i, i) = 0.0;
    }
    double rho_off = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (sd(i) <= 0.0) {
            continue;
        }
        for (Index j = 0; j < n; ++j) {
            rho_off += sd(j) / sd(i) * theta(i, j);
        }
    }
    const double rho = phi_mat.diagonal().sum() + r_bar * rho_off;
    const double kappa = (phi - rho) / gamma;
    return std::clamp(kappa / t, 0.0, 1.0);
}

} // namespace

EstimatorKind parse_estimator_kind(const std::string& name)
{
    for (const auto& [kind, text] : kNames) {
        if (std::ranges::equal(name, std::string_view(text), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) ==
                       std::tolower(static_cast<unsigned char>(b));
            })) {
            return kind;
        }
    }
    throw std::invalid_argument(fmt::format("unknown estimator '{}'", name));
}

const char* to_string(EstimatorKind kind)
{
    for (const auto& [k, text] : kNames) {
        if (k == kind) {
            return text;
        }
    }
    return "?";
}

void EstimatorSpec::validate() const
{
    if (window < 2) {
        throw std::invalid_argument(fmt::format("estimator window must be >= 2, got {}", window));
    }
    if (!(decay > 0.0 && decay < 1.0)) {
        throw std::invalid_argument(fmt::format("EWMA decay must lie in (0, 1), got {}", decay));
    }
    if (!std::isfinite(threshold)) {
        throw std::invalid_argument("semi-covariance threshold must be finite");
    }
}

MatrixXd sample_cov(const MatrixXd& window)
{
    require_rows(window, 2, "sample_cov");
    const MatrixXd centered = kernels::center_columns(window);
    return kernels::cross_product_parallel(centered) / static_cast<double>(window.rows() - 1);
}

MatrixXd semi_cov(const MatrixXd& window, double threshold)
{
    require_rows(window, 1, "semi_cov");
    const MatrixXd down = kernels::downside(window, threshold);
    return kernels::cross_product_parallel(down) / static_cast<double>(window.rows());
}

MatrixXd ewma_cov(const MatrixXd& history, double decay, std::size_t seed_window)
{
    if (!(decay > 0.0 && decay < 1.0)) {
        throw std::invalid_argument(fmt::format("ewma_cov: decay must lie in (0, 1), got {}", decay));
    }
    const auto k = static_cast<Index>(seed_window);
    if (k < 2 || history.rows() < k + 1) {
        throw std::invalid_argument(fmt::format(
            "ewma_cov: history of {} rows too short for seed window {}", history.rows(), k));
    }
    const MatrixXd seed = history.topRows(k);
    const VectorXd mu = seed.colwise().mean().transpose();
    MatrixXd cov = sample_cov(seed);
    for (Index t = k; t < history.rows(); ++t) {
        const VectorXd dev = history.row(t).transpose() - mu;
        cov = decay * cov + (1.0 - decay) * (dev * dev.transpose());
    }
    return symmetrize(cov);
}

MatrixXd shrinkage_target(const MatrixXd& sample, ShrinkTarget target, const MatrixXd& window)
{
    const Index n = sample.rows();
    switch (target) {
    case ShrinkTarget::ConstVar:
        return MatrixXd::Identity(n, n) * (sample.trace() / static_cast<double>(n));
    case ShrinkTarget::SingleFactor: {
        if (window.cols() != n || window.rows() < 2) {
            throw std::invalid_argument("single-factor target needs the returns window");
        }
        const MatrixXd x = kernels::center_columns(window);
        const VectorXd mkt = x.rowwise().mean();
        const double scale = 1.0 / static_cast<double>(window.rows() - 1);
        const VectorXd cov_mkt = x.transpose() * mkt * scale;
        const double var_mkt = mkt.squaredNorm() * scale;
        MatrixXd f = MatrixXd::Zero(n, n);
        if (var_mkt > 0.0) {
            f = cov_mkt * cov_mkt.transpose() / var_mkt;
        }
        f.diagonal() = sample.diagonal();
        return f;
    }
    case ShrinkTarget::ConstCorr: {
        const VectorXd sd = sample.diagonal().cwiseMax(0.0).cwiseSqrt();
        MatrixXd f = mean_correlation(sample) * sd * sd.transpose();
        f.diagonal() = sample.diagonal();
        return f;
    }
    }
    throw std::invalid_argument("unknown shrinkage target");
}

double ledoit_wolf_intensity(ShrinkTarget target, const MatrixXd& window)
{
    require_rows(window, 2, "ledoit_wolf_intensity");
    switch (target) {
    case ShrinkTarget::ConstVar:
        return intensity_const_var(window);
    case ShrinkTarget::SingleFactor:
        return intensity_single_factor(window);
    case ShrinkTarget::ConstCorr:
        return intensity_const_corr(window);
    }
    throw std::invalid_argument("unknown shrinkage target");
}

MatrixXd shrink(const MatrixXd& sample, ShrinkTarget target, const MatrixXd& window,
                std::optional<double> delta)
{
    if (sample.rows() != sample.cols()) {
        throw std::invalid_argument("shrink: covariance must be square");
    }
    if (delta && !(*delta >= 0.0 && *delta <= 1.0)) {
        throw std::invalid_argument(fmt::format("shrink: delta must lie in [0, 1], got {}", *delta));
    }
    const double d = delta ? *delta : ledoit_wolf_intensity(target, window);
    if (d == 0.0) {
        return sample;
    }
    return symmetrize(d * shrinkage_target(sample, target, window) + (1.0 - d) * sample);
}

OracleApproxResult oracle_approx(const MatrixXd& sample, std::size_t n, std::size_t max_iter,
                                 double tol)
{
    if (n < 1 || sample.rows() != sample.cols() || sample.rows() < 1) {
        throw std::invalid_argument("oracle_approx: need n >= 1 and a square matrix");
    }
    const double trace = sample.trace();
    if (!std::isfinite(trace)) {
        throw std::invalid_argument("oracle_approx: non-finite trace");
    }
    const double p = static_cast<double>(sample.rows());
    const double nn = static_cast<double>(n);
    const MatrixXd target = MatrixXd::Identity(sample.rows(), sample.cols()) * (trace / p);

    OracleApproxResult result;
    result.cov = sample;
    if (trace == 0.0) {
        result.converged = true;
        return result;
    }
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const double tr_sigma_s = (result.cov * sample).trace();
        const double tr_sigma = result.cov.trace();
        const double num = (1.0 - 2.0 / p) * tr_sigma_s + tr_sigma * tr_sigma;
        const double den = (nn + 1.0 - 2.0 / p) * tr_sigma_s + (1.0 - nn / p) * tr_sigma * tr_sigma;
        const double rho = den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 1.0;
        result.cov = (1.0 - rho) * sample + rho * target;
        result.rho = rho;
        result.iterations = it;
        if (std::abs(rho - previous) < tol) {
            result.converged = true;
            break;
        }
        previous = rho;
    }
    return result;
}

std::size_t required_history(const EstimatorSpec& spec)
{
    return spec.kind == EstimatorKind::Ewma ? 2 * spec.window : spec.window;
}

MatrixXd estimate(const EstimatorSpec& spec, const MatrixXd& history)
{
    spec.validate();
    const auto need = static_cast<Index>(required_history(spec));
    if (history.rows() < need) {
        throw std::invalid_argument(fmt::format("{} needs {} observations, got {}",
                                                to_string(spec.kind), need, history.rows()));
    }
    const MatrixXd window = history.bottomRows(need);
    MatrixXd cov;
    switch (spec.kind) {
    case EstimatorKind::Sample:
        cov = sample_cov(window);
        break;
    case EstimatorKind::SemiCov:
        cov = semi_cov(window, spec.threshold);
        break;
    case EstimatorKind::Ewma:
        cov = ewma_cov(window, spec.decay, spec.window);
        break;
    case EstimatorKind::ShrinkConstVar:
        cov = shrink(sample_cov(window), ShrinkTarget::ConstVar, window);
        break;
    case EstimatorKind::ShrinkSingleFactor:
        cov = shrink(sample_cov(window), ShrinkTarget::SingleFactor, window);
        break;
    case EstimatorKind::ShrinkConstCorr:
        cov = shrink(sample_cov(window), ShrinkTarget::ConstCorr, window);
        break;
    case EstimatorKind::OracleApprox:
        cov = oracle_approx(sample_cov(window), static_cast<std::size_t>(window.rows())).cov;
        break;
    }
    return repair_psd(std::move(cov));
}

double min_eigen_ratio(const MatrixXd& cov)
{
    const Eigen::SelfAdjointEigenSolver<MatrixXd> solver(symmetrize(cov), Eigen::EigenvaluesOnly);
    const VectorXd& ev = solver.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    return scale > 0.0 ? ev.minCoeff() / scale : 0.0;
}

bool is_symmetric(const MatrixXd& cov, double rel_tol)
{
    if (cov.rows() != cov.cols()) {
        return false;
    }
    const double scale = cov.cwiseAbs().maxCoeff();
    return (cov - cov.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

MatrixXd repair_psd(MatrixXd cov)
{
    cov = symmetrize(cov);
    if (cov.size() == 0) {
        return cov;
    }
    const Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo < -1e-10 * std::max(hi, 0.0) || (hi <= 0.0 && lo < 0.0)) {
        cov.diagonal().array() += std::abs(lo) + 1e-12;
    }
    return cov;
}

} // namespace covcast
