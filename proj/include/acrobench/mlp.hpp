/*
 Copyright 2026 The acrobench Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef ACROBENCH_MLP_HPP
#define ACROBENCH_MLP_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acrobench/rng.hpp"

namespace acrobench {

enum class Activation { Tanh, Relu };

struct MlpSpec {
    int input_dim = 1;
    std::vector<int> hidden_widths;
    int output_dim = 1;
    Activation activation = Activation::Relu;

    void validate() const
    {
        if (input_dim < 1 || output_dim < 1) {
            throw std::invalid_argument("MlpSpec: dimensions must be >= 1");
        }
        for (int w : hidden_widths) {
            if (w < 1) {
                throw std::invalid_argument("MlpSpec: hidden widths must be >= 1");
            }
        }
    }
};

/// Fully connected net with a linear output layer. All parameters live in one flat
/// vector (per layer: weight column-major, then bias) so optimizers and gradient
/// checks work on a single Eigen vector.
template <typename Scalar>
class Mlp {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using WeightMap = Eigen::Map<Matrix>;
    using ConstWeightMap = Eigen::Map<const Matrix>;
    using BiasMap = Eigen::Map<Vector>;
    using ConstBiasMap = Eigen::Map<const Vector>;

    /// Layer inputs recorded by forward() for the backward pass.
    struct Tape {
        std::vector<Matrix> inputs;
        Matrix output;
    };

    Mlp() = default;

    /// All-zero parameters.
    explicit Mlp(MlpSpec spec) : spec_(std::move(spec))
    {
        spec_.validate();
        int in = spec_.input_dim;
        Eigen::Index offset = 0;
        auto add_layer = [&](int out) {
            layers_.push_back({in, out, offset});
            offset += static_cast<Eigen::Index>(in) * out + out;
            in = out;
        };
        for (int w : spec_.hidden_widths) {
            add_layer(w);
        }
        add_layer(spec_.output_dim);
        params_ = Vector::Zero(offset);
    }

    /// Weights and biases i.i.d. U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static Mlp random(MlpSpec spec, Rng& rng)
    {
        Mlp net(std::move(spec));
        for (int l = 0; l < net.num_layers(); ++l) {
            const auto& layer = net.layers_[l];
            const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
            const Eigen::Index count = static_cast<Eigen::Index>(layer.in) * layer.out + layer.out;
            for (Eigen::Index k = 0; k < count; ++k) {
                net.params_(layer.offset + k) = static_cast<Scalar>(bound * (2.0 * uniform01(rng) - 1.0));
            }
        }
        return net;
    }

    const MlpSpec& spec() const noexcept { return spec_; }
    int num_layers() const noexcept { return static_cast<int>(layers_.size()); }
    int input_dim() const noexcept { return spec_.input_dim; }
    int output_dim() const noexcept { return spec_.output_dim; }
    Eigen::Index num_params() const noexcept { return params_.size(); }

    const Vector& params() const noexcept { return params_; }
    Vector& params() noexcept { return params_; }

    void set_params(const Vector& p)
    {
        if (p.size() != params_.size()) {
            throw std::invalid_argument("Mlp::set_params: size mismatch");
        }
        params_ = p;
    }

    WeightMap weight(int l) { return {params_.data() + layers_[l].offset, layers_[l].out, layers_[l].in}; }
    ConstWeightMap weight(int l) const { return {params_.data() + layers_[l].offset, layers_[l].out, layers_[l].in}; }
    BiasMap bias(int l) { return {params_.data() + bias_offset(l), layers_[l].out}; }
    ConstBiasMap bias(int l) const { return {params_.data() + bias_offset(l), layers_[l].out}; }

    /// Batch forward; columns of x are samples.
    Matrix forward(const Matrix& x) const
    {
        check_input(x.rows());
        Matrix a = x;
        for (int l = 0; l < num_layers(); ++l) {
            Matrix z = weight(l) * a;
            z.colwise() += bias(l);
            if (l + 1 < num_layers()) {
                activate(z);
            }
            a = std::move(z);
        }
        return a;
    }

    Vector forward(const Vector& x) const
    {
        Matrix out = forward(Matrix(x));
        return out.col(0);
    }

    Matrix forward(const Matrix& x, Tape& tape) const
    {
        check_input(x.rows());
        tape.inputs.resize(layers_.size());
        tape.inputs[0] = x;
        for (int l = 0; l < num_layers(); ++l) {
            Matrix z = weight(l) * tape.inputs[l];
            z.colwise() += bias(l);
            if (l + 1 < num_layers()) {
                activate(z);
                tape.inputs[l + 1] = std::move(z);
            } else {
                tape.output = std::move(z);
            }
        }
        return tape.output;
    }

    /// Gradient of sum over columns of <output, upstream> w.r.t. the flat parameters.
    Vector backward(const Tape& tape, const Matrix& upstream) const
    {
        if (upstream.rows() != output_dim() || tape.inputs.empty() || upstream.cols() != tape.inputs[0].cols()) {
            throw std::invalid_argument("Mlp::backward: upstream gradient shape mismatch");
        }
        Vector grad = Vector::Zero(params_.size());
        Matrix delta = upstream;
        for (int l = num_layers() - 1; l >= 0; --l) {
            const auto& layer = layers_[l];
            const Matrix& a = tape.inputs[l];
            WeightMap gw(grad.data() + layer.offset, layer.out, layer.in);
            gw.noalias() = delta * a.transpose();
            BiasMap(grad.data() + bias_offset(l), layer.out) = delta.rowwise().sum();
            if (l > 0) {
                Matrix prev = weight(l).transpose() * delta;
                activate_backward(prev, a);
                delta = std::move(prev);
            }
        }
        return grad;
    }

    Vector backward(const Vector& x, const Vector& upstream) const
    {
        Tape tape;
        forward(Matrix(x), tape);
        return backward(tape, Matrix(upstream));
    }

    template <typename Other>
    Mlp<Other> cast() const
    {
        Mlp<Other> out(spec_);
        out.params() = params_.template cast<Other>();
        return out;
    }

private:
    struct Layer {
        int in;
        int out;
        Eigen::Index offset;
    };

    Eigen::Index bias_offset(int l) const
    {
        return layers_[l].offset + static_cast<Eigen::Index>(layers_[l].in) * layers_[l].out;
    }

    void check_input(Eigen::Index rows) const
    {
        if (rows != spec_.input_dim) {
            throw std::invalid_argument("Mlp: input dimension " + std::to_string(rows) + " != "
                                        + std::to_string(spec_.input_dim));
        }
    }

    void activate(Matrix& z) const
    {
        if (spec_.activation == Activation::Relu) {
            z = z.cwiseMax(Scalar(0));
        } else {
            z = z.array().tanh().matrix();
        }
    }

    // delta <- delta * f'(.) expressed through the post-activation values.
    void activate_backward(Matrix& delta, const Matrix& post) const
    {
        if (spec_.activation == Activation::Relu) {
            delta = (post.array() > Scalar(0)).select(delta, Scalar(0));
        } else {
            delta.array() *= (Scalar(1) - post.array().square());
        }
    }

    MlpSpec spec_;
    std::vector<Layer> layers_;
    Vector params_;
};

/// Adam with bias correction.
template <typename Scalar>
class Adam {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Adam(Eigen::Index size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : m_(Vector::Zero(size)), v_(Vector::Zero(size)), lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps)
    {
    }

    void step(Vector& params, const Vector& grad)
    {
        ++t_;
        m_ = Scalar(beta1_) * m_ + Scalar(1.0 - beta1_) * grad;
        v_ = Scalar(beta2_) * v_ + Scalar(1.0 - beta2_) * grad.cwiseAbs2();
        const double c1 = 1.0 - std::pow(beta1_, t_);
        const double c2 = 1.0 - std::pow(beta2_, t_);
        const Scalar step_size = Scalar(lr_ / c1);
        params.array() -= step_size * m_.array() / ((v_.array() / Scalar(c2)).sqrt() + Scalar(eps_));
    }

    long steps() const noexcept { return t_; }

private:
    Vector m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

}  // namespace acrobench

#endif  // ACROBENCH_MLP_HPP
