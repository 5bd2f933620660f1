/**
 * @file lstm.hpp
 * @brief Stacked LSTM with backpropagation through time
 *
 * Per layer and step, with gate blocks stacked in the order f, i, g, o:
 *
 *     f_t  = σ(W_f h_{t-1} + U_f x_t + b_f)
 *     i1_t = σ(W_i h_{t-1} + U_i x_t + b_i)
 *     i2_t = tanh(W_g h_{t-1} + U_g x_t + b_g)
 *     o_t  = σ(W_o h_{t-1} + U_o x_t + b_o)
 *     c_t  = f_t ∘ c_{t-1} + i1_t ∘ i2_t
 *     h_t  = tanh(c_t) ∘ o_t
 *
 * with h_0 = c_0 = 0. Layer l > 0 takes h_t of layer l-1 as its input.
 */
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covcast/parameters.hpp"
#include "covcast/rng.hpp"

namespace covcast {

/// Activations kept from a forward pass for the backward pass.
struct LstmTrace {
    struct Step {
        Eigen::VectorXd input;
        Eigen::VectorXd h_prev;
        Eigen::VectorXd c_prev;
        Eigen::VectorXd gates; // f, i, g, o after activation
        Eigen::VectorXd c;
        Eigen::VectorXd tanh_c;
    };
    std::vector<std::vector<Step>> layers; // [layer][step]
};

class LstmStack {
public:
    LstmStack() = default;
    LstmStack(ParameterSet& params, Eigen::Index input_size, std::vector<Eigen::Index> hidden,
              const std::string& prefix = "layer");

    Eigen::Index input_size() const { return input_size_; }
    Eigen::Index output_size() const { return hidden_.empty() ? input_size_ : hidden_.back(); }
    const std::vector<Eigen::Index>& hidden() const { return hidden_; }

    /// Uniform ±1/√fan_in: fan_in is the layer input size for U and the hidden
    /// size for W and b.
    void initialize(ParameterSet& params, Rng& rng) const;

    /// Runs the sequence (steps x input) and returns the top layer's final h.
    Eigen::VectorXd forward(const ParameterSet& params, const Eigen::MatrixXd& sequence,
                            LstmTrace* trace = nullptr) const;

    /// Accumulates into `grad` the gradient given dL/dh_T of the top layer.
    /// Optionally returns dL/dx for every input step.
    void backward(const ParameterSet& params, const LstmTrace& trace,
                  const Eigen::VectorXd& d_top, Eigen::VectorXd& grad,
                  Eigen::MatrixXd* d_sequence = nullptr) const;

private:
    struct Layer {
        ParameterSet::BlockId w;
        ParameterSet::BlockId u;
        ParameterSet::BlockId b;
    };
    Eigen::Index input_size_ = 0;
    std::vector<Eigen::Index> hidden_;
    std::vector<Layer> layers_;
};

/// y = W x + b.
class Linear {
public:
    Linear() = default;
    Linear(ParameterSet& params, Eigen::Index in, Eigen::Index out, const std::string& name);

    void initialize(ParameterSet& params, Rng& rng) const;
    Eigen::VectorXd forward(const ParameterSet& params, const Eigen::VectorXd& x) const;
    /// Accumulates weight gradients and returns dL/dx.
    Eigen::VectorXd backward(const ParameterSet& params, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& d_out, Eigen::VectorXd& grad) const;
    Eigen::Index in() const { return in_; }
    Eigen::Index out() const { return out_; }
    ParameterSet::BlockId weight_block() const { return w_; }
    ParameterSet::BlockId bias_block() const { return b_; }

private:
    ParameterSet::BlockId w_ = 0;
    ParameterSet::BlockId b_ = 0;
    Eigen::Index in_ = 0;
    Eigen::Index out_ = 0;
};

/// LSTM stack with a linear read-out of the final hidden state: ŷ = V h_T + bias.
struct LstmModel {
    ParameterSet params;
    LstmStack stack;
    Linear head;

    LstmModel() = default;
    LstmModel(Eigen::Index series, std::vector<Eigen::Index> hidden);
};

/// One-step forecast from a (steps x M) input window.
Eigen::VectorXd lstm_forward(const LstmModel& model, const Eigen::MatrixXd& sequence);

/// Mean squared error of the forecast against `target`; the gradient with
/// respect to every parameter is accumulated into `grad` when given.
double lstm_loss(const LstmModel& model, const Eigen::MatrixXd& sequence,
                 const Eigen::VectorXd& target, Eigen::VectorXd* grad = nullptr);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

} // namespace covcast
