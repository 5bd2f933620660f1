#pragma once

#include <Eigen/Dense>

// Data-parallel inner loops. Every parallel kernel has a serial twin that
// evaluates each output entry with the same operation order, so the two agree
// bit for bit regardless of thread count. The serial versions are the test
// references and the benchmark baseline.
namespace covcast::kernels {

/// Xᵀ·X, accumulating each entry over rows in order.
Eigen::MatrixXd cross_product_serial(const Eigen::MatrixXd& x);
Eigen::MatrixXd cross_product_parallel(const Eigen::MatrixXd& x);

/// Rows minus their column means.
Eigen::MatrixXd center_columns(const Eigen::MatrixXd& x);

/// min(x - threshold, 0) elementwise.
Eigen::MatrixXd downside(const Eigen::MatrixXd& x, double threshold);

} // namespace covcast::kernels
