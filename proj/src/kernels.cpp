#include "covcast/kernels.hpp"

#include <algorithm>
#include <vector>

namespace covcast::kernels {

namespace {

double dot_columns(const Eigen::MatrixXd& x, Eigen::Index i, Eigen::Index j)
{
    double sum = 0.0;
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
        sum += x(t, i) * x(t, j);
    }
    return sum;
}

} // namespace

Eigen::MatrixXd cross_product_serial(const Eigen::MatrixXd& x)
{
    const Eigen::Index n = x.cols();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            out(i, j) = dot_columns(x, i, j);
            out(j, i) = out(i, j);
        }
    }
    return out;
}

Eigen::MatrixXd cross_product_parallel(const Eigen::MatrixXd& x)
{
    const Eigen::Index n = x.cols();
    Eigen::MatrixXd out(n, n);
    const Eigen::Index pairs = n * (n + 1) / 2;
#pragma omp parallel for schedule(static) if (pairs * x.rows() > 4096)
    for (Eigen::Index p = 0; p < pairs; ++p) {
        // Invert the packed lower-triangle index p = i(i+1)/2 + j.
        Eigen::Index i = 0;
        while ((i + 1) * (i + 2) / 2 <= p) {
            ++i;
        }
        const Eigen::Index j = p - i * (i + 1) / 2;
        const double v = dot_columns(x, i, j);
        out(i, j) = v;
        out(j, i) = v;
    }
    return out;
}

Eigen::MatrixXd center_columns(const Eigen::MatrixXd& x)
{
    Eigen::MatrixXd out = x;
    const auto rows = static_cast<double>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        double mean = 0.0;
        for (Eigen::Index t = 0; t < x.rows(); ++t) {
            mean += x(t, j);
        }
        mean /= rows;
        for (Eigen::Index t = 0; t < x.rows(); ++t) {
            out(t, j) -= mean;
        }
    }
    return out;
}

Eigen::MatrixXd downside(const Eigen::MatrixXd& x, double threshold)
{
    return (x.array() - threshold).min(0.0).matrix();
}

} // namespace covcast::kernels
