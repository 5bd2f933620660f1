#include "covcast/copula.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "covcast/normal.hpp"

namespace covcast {

MarginalTransform MarginalTransform::fit(std::span<const double> sample)
{
    MarginalTransform t;
    if (sample.size() < 2) {
        return t;
    }
    t.sorted_.assign(sample.begin(), sample.end());
    std::sort(t.sorted_.begin(), t.sorted_.end());
    if (t.sorted_.front() == t.sorted_.back()) {
        t.sorted_.clear();
    }
    return t;
}

double MarginalTransform::forward(double x) const
{
    if (identity()) {
        return x;
    }
    const auto n = static_cast<double>(sorted_.size());
    double position = 0.0;
    const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), x);
    if (lo == sorted_.end()) {
        position = n - 1.0;
    } else if (*lo == x) {
        const auto hi = std::upper_bound(lo, sorted_.end(), x);
        position = 0.5 * static_cast<double>((lo - sorted_.begin()) + (hi - sorted_.begin()) - 1);
    } else if (lo == sorted_.begin()) {
        position = 0.0;
    } else {
        const auto k = lo - sorted_.begin() - 1;
        const double a = sorted_[static_cast<std::size_t>(k)];
        const double b = *lo;
        position = static_cast<double>(k) + (x - a) / (b - a);
    }
    return normal_quantile((position + 0.5) / n);
}

double MarginalTransform::inverse(double z) const
{
    if (identity()) {
        return z;
    }
    const auto n = sorted_.size();
    const double position =
        std::clamp(normal_cdf(z) * static_cast<double>(n) - 0.5, 0.0, static_cast<double>(n - 1));
    const auto k = std::min(static_cast<std::size_t>(position), n - 2);
    const double frac = position - static_cast<double>(k);
    if (frac == 0.0) {
        return sorted_[k];
    }
    return sorted_[k] + frac * (sorted_[k + 1] - sorted_[k]);
}

SeriesTransform::SeriesTransform(const Eigen::MatrixXd& training, bool scaling, bool copula)
{
    const Eigen::Index cols = training.cols();
    scales_ = Eigen::VectorXd::Ones(cols);
    if (scaling && training.rows() > 0) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            scales_(j) = 1.0 + training.col(j).cwiseAbs().mean();
        }
    }
    if (copula) {
        marginals_.resize(static_cast<std::size_t>(cols));
        for (Eigen::Index j = 0; j < cols; ++j) {
            const Eigen::VectorXd scaled = training.col(j) / scales_(j);
            marginals_[static_cast<std::size_t>(j)] =
                MarginalTransform::fit({scaled.data(), static_cast<std::size_t>(scaled.size())});
            if (marginals_[static_cast<std::size_t>(j)].identity()) {
                ++bypassed_;
            }
        }
        if (bypassed_ > 0) {
            spdlog::warn("copula transform bypassed for {} of {} constant series", bypassed_, cols);
        }
    }
}

Eigen::MatrixXd SeriesTransform::forward(const Eigen::MatrixXd& values) const
{
    Eigen::MatrixXd out(values.rows(), values.cols());
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        for (Eigen::Index t = 0; t < values.rows(); ++t) {
            double v = values(t, j) / scales_(j);
            if (!marginals_.empty()) {
                v = marginals_[static_cast<std::size_t>(j)].forward(v);
            }
            out(t, j) = v;
        }
    }
    return out;
}

double SeriesTransform::inverse(double z, std::size_t column) const
{
    double v = z;
    if (!marginals_.empty()) {
        v = marginals_[column].inverse(v);
    }
    return v * scales_(static_cast<Eigen::Index>(column));
}

} // namespace covcast
