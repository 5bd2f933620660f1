#include "covcast/lstm.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "covcast/errors.hpp"

namespace covcast {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

LstmStack::LstmStack(ParameterSet& params, Index input_size, std::vector<Index> hidden,
                     const std::string& prefix)
    : input_size_(input_size), hidden_(std::move(hidden))
{
    if (input_size_ < 1 || hidden_.empty()) {
        throw std::invalid_argument("LSTM needs a positive input size and at least one layer");
    }
    Index in = input_size_;
    for (std::size_t l = 0; l < hidden_.size(); ++l) {
        const Index h = hidden_[l];
        if (h < 1) {
            throw std::invalid_argument("LSTM layer sizes must be >= 1");
        }
        const std::vector<std::string> gates{"f", "i", "g", "o"};
        Layer layer;
        layer.w = params.add(fmt::format("{}{}.W", prefix, l), 4 * h, h, gates);
        layer.u = params.add(fmt::format("{}{}.U", prefix, l), 4 * h, in, gates);
        layer.b = params.add(fmt::format("{}{}.b", prefix, l), 4 * h, 1, gates);
        layers_.push_back(layer);
        in = h;
    }
}

void LstmStack::initialize(ParameterSet& params, Rng& rng) const
{
    Index in = input_size_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const double bound_u = 1.0 / std::sqrt(static_cast<double>(in));
        const double bound_h = 1.0 / std::sqrt(static_cast<double>(hidden_[l]));
        auto w = params.block(layers_[l].w);
        auto u = params.block(layers_[l].u);
        auto b = params.block(layers_[l].b);
        for (Index k = 0; k < w.size(); ++k) {
            w.data()[k] = rng.uniform(-bound_h, bound_h);
        }
        for (Index k = 0; k < u.size(); ++k) {
            u.data()[k] = rng.uniform(-bound_u, bound_u);
        }
        for (Index k = 0; k < b.size(); ++k) {
            b.data()[k] = rng.uniform(-bound_h, bound_h);
        }
        in = hidden_[l];
    }
}

VectorXd LstmStack::forward(const ParameterSet& params, const MatrixXd& sequence,
                            LstmTrace* trace) const
{
    if (sequence.cols() != input_size_ || sequence.rows() < 1) {
        throw std::invalid_argument(fmt::format("LSTM expects steps x {} input, got {}x{}",
                                                input_size_, sequence.rows(), sequence.cols()));
    }
    const Index steps = sequence.rows();
    if (trace != nullptr) {
        trace->layers.assign(layers_.size(), {});
    }
    MatrixXd inputs = sequence;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Index h = hidden_[l];
        const auto w = params.block(layers_[l].w);
        const auto u = params.block(layers_[l].u);
        const auto b = params.block(layers_[l].b);
        VectorXd h_prev = VectorXd::Zero(h);
        VectorXd c_prev = VectorXd::Zero(h);
        MatrixXd outputs(steps, h);
        if (trace != nullptr) {
            trace->layers[l].resize(static_cast<std::size_t>(steps));
        }
        for (Index t = 0; t < steps; ++t) {
            const VectorXd x = inputs.row(t).transpose();
            VectorXd a = w * h_prev + u * x + b;
            for (Index k = 0; k < h; ++k) {
                a(k) = sigmoid(a(k));
                a(h + k) = sigmoid(a(h + k));
                a(2 * h + k) = std::tanh(a(2 * h + k));
                a(3 * h + k) = sigmoid(a(3 * h + k));
            }
            const VectorXd c = a.segment(0, h).cwiseProduct(c_prev) +
                               a.segment(h, h).cwiseProduct(a.segment(2 * h, h));
            const VectorXd tanh_c = c.array().tanh().matrix();
            const VectorXd h_new = tanh_c.cwiseProduct(a.segment(3 * h, h));
            if (trace != nullptr) {
                trace->layers[l][static_cast<std::size_t>(t)] = {x, h_prev, c_prev, a, c, tanh_c};
            }
            outputs.row(t) = h_new.transpose();
            h_prev = h_new;
            c_prev = c;
        }
        inputs = std::move(outputs);
    }
    VectorXd top = inputs.row(steps - 1).transpose();
    if (!top.allFinite()) {
        throw RunError("LSTM produced a non-finite hidden state");
    }
    return top;
}

void LstmStack::backward(const ParameterSet& params, const LstmTrace& trace, const VectorXd& d_top,
                         VectorXd& grad, MatrixXd* d_sequence) const
{
    const auto steps = static_cast<Index>(trace.layers.front().size());
    // dL/dh_t arriving from above, per step, for the layer being processed.
    MatrixXd d_from_above = MatrixXd::Zero(steps, hidden_.back());
    d_from_above.row(steps - 1) = d_top.transpose();

    for (std::size_t li = layers_.size(); li-- > 0;) {
        const Index h = hidden_[li];
        const auto& steps_trace = trace.layers[li];
        const auto w = params.block(layers_[li].w);
        const auto u = params.block(layers_[li].u);
        auto gw = params.view(grad, layers_[li].w);
        auto gu = params.view(grad, layers_[li].u);
        auto gb = params.view(grad, layers_[li].b);
        const Index in = u.cols();
        MatrixXd d_inputs(steps, in);
        VectorXd dh_next = VectorXd::Zero(h);
        VectorXd dc_next = VectorXd::Zero(h);
        VectorXd da(4 * h);
        for (Index t = steps; t-- > 0;) {
            const auto& s = steps_trace[static_cast<std::size_t>(t)];
            const VectorXd dh = d_from_above.row(t).transpose() + dh_next;
            for (Index k = 0; k < h; ++k) {
                const double f = s.gates(k);
                const double i = s.gates(h + k);
                const double g = s.gates(2 * h + k);
                const double o = s.gates(3 * h + k);
                const double tc = s.tanh_c(k);
                const double dc = dc_next(k) + dh(k) * o * (1.0 - tc * tc);
                da(k) = dc * s.c_prev(k) * f * (1.0 - f);
                da(h + k) = dc * g * i * (1.0 - i);
                da(2 * h + k) = dc * i * (1.0 - g * g);
                da(3 * h + k) = dh(k) * tc * o * (1.0 - o);
                dc_next(k) = dc * f;
            }
            gw.noalias() += da * s.h_prev.transpose();
            gu.noalias() += da * s.input.transpose();
            gb.col(0) += da;
            dh_next.noalias() = w.transpose() * da;
            d_inputs.row(t).noalias() = (u.transpose() * da).transpose();
        }
        if (li == 0) {
            if (d_sequence != nullptr) {
                *d_sequence = std::move(d_inputs);
            }
        } else {
            d_from_above = std::move(d_inputs);
        }
    }
}

Linear::Linear(ParameterSet& params, Index in, Index out, const std::string& name)
    : in_(in), out_(out)
{
    w_ = params.add(name + ".W", out, in);
    b_ = params.add(name + ".b", out, 1);
}

void Linear::initialize(ParameterSet& params, Rng& rng) const
{
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Index>(in_, 1)));
    auto w = params.block(w_);
    auto b = params.block(b_);
    for (Index k = 0; k < w.size(); ++k) {
        w.data()[k] = rng.uniform(-bound, bound);
    }
    for (Index k = 0; k < b.size(); ++k) {
        b.data()[k] = rng.uniform(-bound, bound);
    }
}

VectorXd Linear::forward(const ParameterSet& params, const VectorXd& x) const
{
    return params.block(w_) * x + params.block(b_).col(0);
}

VectorXd Linear::backward(const ParameterSet& params, const VectorXd& x, const VectorXd& d_out,
                          VectorXd& grad) const
{
    params.view(grad, w_).noalias() += d_out * x.transpose();
    params.view(grad, b_).col(0) += d_out;
    return params.block(w_).transpose() * d_out;
}

LstmModel::LstmModel(Index series, std::vector<Index> hidden)
{
    stack = LstmStack(params, series, std::move(hidden));
    head = Linear(params, stack.output_size(), series, "V");
}

VectorXd lstm_forward(const LstmModel& model, const MatrixXd& sequence)
{
    return model.head.forward(model.params, model.stack.forward(model.params, sequence));
}

double lstm_loss(const LstmModel& model, const MatrixXd& sequence, const VectorXd& target,
                 VectorXd* grad)
{
    LstmTrace trace;
    const VectorXd h = model.stack.forward(model.params, sequence, grad ? &trace : nullptr);
    const VectorXd err = model.head.forward(model.params, h) - target;
    const auto m = static_cast<double>(err.size());
    if (grad != nullptr) {
        const VectorXd d_out = 2.0 * err / m;
        const VectorXd dh = model.head.backward(model.params, h, d_out, *grad);
        model.stack.backward(model.params, trace, dh, *grad);
    }
    return err.squaredNorm() / m;
}

} // namespace covcast
