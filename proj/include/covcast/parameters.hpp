#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace covcast {

/// Named matrix blocks laid out in one flat vector, so optimizers and
/// gradient checks can treat a whole model as a single vector.
class ParameterSet {
public:
    struct Block {
        std::string name;
        Eigen::Index offset = 0;
        Eigen::Index rows = 0;
        Eigen::Index cols = 0;
        /// When non-empty the rows split evenly into these named groups on dump.
        std::vector<std::string> row_groups;
    };

    using BlockId = std::size_t;

    BlockId add(std::string name, Eigen::Index rows, Eigen::Index cols,
                std::vector<std::string> row_groups = {});

    Eigen::Map<Eigen::MatrixXd> block(BlockId id) { return view(values_, id); }
    Eigen::Map<const Eigen::MatrixXd> block(BlockId id) const { return view(values_, id); }

    /// The same block inside a gradient vector with this set's layout.
    Eigen::Map<Eigen::MatrixXd> view(Eigen::VectorXd& flat, BlockId id) const;
    Eigen::Map<const Eigen::MatrixXd> view(const Eigen::VectorXd& flat, BlockId id) const;

    Eigen::VectorXd& values() { return values_; }
    const Eigen::VectorXd& values() const { return values_; }
    Eigen::Index size() const { return values_.size(); }
    const std::vector<Block>& blocks() const { return blocks_; }
    Eigen::VectorXd zeros() const { return Eigen::VectorXd::Zero(values_.size()); }

    /// `name,row,col,value` with gate-split names where configured.
    std::string to_csv() const;

private:
    Eigen::VectorXd values_;
    std::vector<Block> blocks_;
};

/// ADAM with bias correction.
class Adam {
public:
    explicit Adam(Eigen::Index size, double learning_rate = 0.01, double beta1 = 0.9,
                  double beta2 = 0.999, double epsilon = 1e-8);

    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

private:
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    double beta1_pow_ = 1.0;
    double beta2_pow_ = 1.0;
};

} // namespace covcast
