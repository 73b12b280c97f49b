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

#ifndef ACROBENCH_LOSSES_HPP
#define ACROBENCH_LOSSES_HPP

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "acrobench/mixture.hpp"

namespace acrobench {

enum class LossKind { Mse, FixedGaussianNll, MixtureNll };

struct LossSpec {
    LossKind kind = LossKind::Mse;
    double fixed_sigma = 1.0;   // FixedGaussianNll
    int components = 1;         // MixtureNll
    int dims = 1;               // MixtureNll
    double sigma_floor = 1e-3;  // MixtureNll, in standardized units

    int output_dim() const noexcept { return kind == LossKind::MixtureNll ? mixture_raw_size(components, dims) : dims; }
};

template <typename Scalar>
struct LossValue {
    Scalar loss;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> grad;  // same shape as the net output
};

/// Negative log-likelihood of one target under the mixture encoded by `raw`, with the
/// analytic gradient w.r.t. the raw outputs written to `grad`. Uses log-sum-exp.
template <typename Scalar, typename DRaw, typename DY, typename DGrad>
Scalar mixture_nll(const Eigen::MatrixBase<DRaw>& raw, const Eigen::MatrixBase<DY>& y, int components, int dims,
                   Scalar sigma_floor, const Eigen::MatrixBase<DGrad>& grad_out)
{
    auto& grad = const_cast<Eigen::MatrixBase<DGrad>&>(grad_out);
    const int D = components;
    const auto logits = raw.head(D);
    const Scalar lse_logits = log_sum_exp(logits);

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a(D);
    for (int l = 0; l < D; ++l) {
        Scalar acc = logits(l) - lse_logits;
        for (int j = 0; j < dims; ++j) {
            const Scalar mu = raw(D + l * dims + j);
            const Scalar sigma = softplus(raw(D + D * dims + l * dims + j)) + sigma_floor;
            const Scalar z = (y(j) - mu) / sigma;
            acc += Scalar(-0.5) * z * z - std::log(sigma) - Scalar(kHalfLog2Pi);
        }
        a(l) = acc;
    }
    const Scalar log_p = log_sum_exp(a);
    for (int l = 0; l < D; ++l) {
        const Scalar resp = std::exp(a(l) - log_p);
        const Scalar w = std::exp(logits(l) - lse_logits);
        grad(l) = w - resp;
        for (int j = 0; j < dims; ++j) {
            const int im = D + l * dims + j;
            const int is = D + D * dims + l * dims + j;
            const Scalar mu = raw(im);
            const Scalar r = raw(is);
            const Scalar sigma = softplus(r) + sigma_floor;
            const Scalar diff = y(j) - mu;
            grad(im) = -resp * diff / (sigma * sigma);
            grad(is) = -resp * (diff * diff / (sigma * sigma * sigma) - Scalar(1) / sigma) * sigmoid(r);
        }
    }
    return -log_p;
}

/// Mean loss over the columns of a batch and its gradient w.r.t. the net outputs.
template <typename Scalar>
LossValue<Scalar> evaluate_loss(const LossSpec& spec, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& out,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y)
{
    const Eigen::Index n = out.cols();
    if (n == 0 || y.cols() != n || out.rows() != spec.output_dim() || y.rows() != spec.dims) {
        throw std::invalid_argument("evaluate_loss: shape mismatch");
    }
    const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
    LossValue<Scalar> v{Scalar(0), {}};
    switch (spec.kind) {
    case LossKind::Mse: {
        const auto diff = (out - y).eval();
        v.loss = diff.squaredNorm() * inv_n;
        v.grad = Scalar(2) * inv_n * diff;
        break;
    }
    case LossKind::FixedGaussianNll: {
        const Scalar s = static_cast<Scalar>(spec.fixed_sigma);
        const auto diff = (out - y).eval();
        v.loss = (diff.squaredNorm() / (Scalar(2) * s * s)) * inv_n
                 + static_cast<Scalar>(spec.dims) * (std::log(s) + Scalar(kHalfLog2Pi));
        v.grad = inv_n / (s * s) * diff;
        break;
    }
    case LossKind::MixtureNll: {
        v.grad.resize(out.rows(), n);
        double total = 0.0;
        const Scalar floor = static_cast<Scalar>(spec.sigma_floor);
        for (Eigen::Index c = 0; c < n; ++c) {
            total += static_cast<double>(
                mixture_nll(out.col(c), y.col(c), spec.components, spec.dims, floor, v.grad.col(c)));
        }
        v.loss = static_cast<Scalar>(total / static_cast<double>(n));
        v.grad *= inv_n;
        break;
    }
    }
    return v;
}

}  // namespace acrobench

#endif  // ACROBENCH_LOSSES_HPP
