#include "covcast/parameters.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "covcast/csv.hpp"

namespace covcast {

ParameterSet::BlockId ParameterSet::add(std::string name, Eigen::Index rows, Eigen::Index cols,
                                        std::vector<std::string> row_groups)
{
    if (rows < 0 || cols < 0) {
        throw std::invalid_argument("parameter block with negative shape");
    }
    if (!row_groups.empty() && rows % static_cast<Eigen::Index>(row_groups.size()) != 0) {
        throw std::invalid_argument("row groups must divide the block rows");
    }
    Block b{std::move(name), values_.size(), rows, cols, std::move(row_groups)};
    values_.conservativeResize(values_.size() + rows * cols);
    values_.tail(rows * cols).setZero();
    blocks_.push_back(std::move(b));
    return blocks_.size() - 1;
}

Eigen::Map<Eigen::MatrixXd> ParameterSet::view(Eigen::VectorXd& flat, BlockId id) const
{
    const Block& b = blocks_.at(id);
    return {flat.data() + b.offset, b.rows, b.cols};
}

Eigen::Map<const Eigen::MatrixXd> ParameterSet::view(const Eigen::VectorXd& flat, BlockId id) const
{
    const Block& b = blocks_.at(id);
    return {flat.data() + b.offset, b.rows, b.cols};
}

std::string ParameterSet::to_csv() const
{
    std::string out = "name,row,col,value\n";
    for (std::size_t id = 0; id < blocks_.size(); ++id) {
        const Block& b = blocks_[id];
        const auto m = view(values_, id);
        const Eigen::Index group_rows =
            b.row_groups.empty() ? b.rows : b.rows / static_cast<Eigen::Index>(b.row_groups.size());
        for (Eigen::Index r = 0; r < b.rows; ++r) {
            std::string name = b.name;
            Eigen::Index row = r;
            if (!b.row_groups.empty()) {
                name += '_' + b.row_groups[static_cast<std::size_t>(r / group_rows)];
                row = r % group_rows;
            }
            for (Eigen::Index c = 0; c < b.cols; ++c) {
                out += fmt::format("{},{},{},{}\n", name, row, c, format_number(m(r, c)));
            }
        }
    }
    return out;
}

Adam::Adam(Eigen::Index size, double learning_rate, double beta1, double beta2, double epsilon)
    : m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)), lr_(learning_rate),
      beta1_(beta1), beta2_(beta2), eps_(epsilon)
{
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad)
{
    beta1_pow_ *= beta1_;
    beta2_pow_ *= beta2_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - beta1_pow_;
    const double c2 = 1.0 - beta2_pow_;
    for (Eigen::Index k = 0; k < params.size(); ++k) {
        params(k) -= lr_ * (m_(k) / c1) / (std::sqrt(v_(k) / c2) + eps_);
    }
}

} // namespace covcast
