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

#ifndef ACROBENCH_MIXTURE_HPP
#define ACROBENCH_MIXTURE_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "acrobench/rng.hpp"

namespace acrobench {

template <typename Scalar>
Scalar softplus(Scalar x) noexcept
{
    return std::max(x, Scalar(0)) + std::log1p(std::exp(-std::abs(x)));
}

template <typename Scalar>
Scalar sigmoid(Scalar x) noexcept
{
    if (x >= Scalar(0)) {
        return Scalar(1) / (Scalar(1) + std::exp(-x));
    }
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v)
{
    using Scalar = typename Derived::Scalar;
    const Scalar m = v.maxCoeff();
    if (!std::isfinite(m)) {
        return m;
    }
    return m + std::log((v.array() - m).exp().sum());
}

inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline constexpr double kHalfLog2Pi = 0.91893853320467274178032973640562;

/// Diagonal Gaussian mixture over `dims` outputs: p(y) = sum_l w_l prod_j N(y_j; mu_jl, sigma_jl).
/// A one-dimensional mixture is the dims() == 1 case.
template <typename Scalar>
struct MixtureParams {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Vector weights;  // D
    Matrix means;    // dims x D
    Matrix sigmas;   // dims x D

    int components() const noexcept { return static_cast<int>(weights.size()); }
    int dims() const noexcept { return static_cast<int>(means.rows()); }
};

using Mixture = MixtureParams<double>;

/// Raw net outputs per sample: [logits (D) | means (D*dims) | sigma pre-activations (D*dims)],
/// component-major within the mean and sigma blocks.
constexpr int mixture_raw_size(int components, int dims) noexcept { return components * (1 + 2 * dims); }

template <typename Derived>
MixtureParams<typename Derived::Scalar> decode_mixture(const Eigen::MatrixBase<Derived>& raw, int components,
                                                       int dims, typename Derived::Scalar sigma_floor)
{
    using Scalar = typename Derived::Scalar;
    if (raw.size() != mixture_raw_size(components, dims)) {
        throw std::invalid_argument("decode_mixture: raw output size mismatch");
    }
    MixtureParams<Scalar> m;
    const auto logits = raw.head(components);
    const Scalar lse = log_sum_exp(logits);
    m.weights = (logits.array() - lse).exp().matrix();
    m.means.resize(dims, components);
    m.sigmas.resize(dims, components);
    for (int l = 0; l < components; ++l) {
        for (int j = 0; j < dims; ++j) {
            m.means(j, l) = raw(components + l * dims + j);
            m.sigmas(j, l) = softplus(raw(components + components * dims + l * dims + j)) + sigma_floor;
        }
    }
    return m;
}

/// Per-component log(w_l) + log prod_{j in [first, first+count)} N(y_j; mu_jl, sigma_jl).
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> component_log_terms(const MixtureParams<Scalar>& m,
                                                             const Eigen::MatrixBase<Derived>& y, int first, int count)
{
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a(m.components());
    for (int l = 0; l < m.components(); ++l) {
        Scalar acc = std::log(m.weights(l));
        for (int j = first; j < first + count; ++j) {
            const Scalar z = (y(j) - m.means(j, l)) / m.sigmas(j, l);
            acc += Scalar(-0.5) * z * z - std::log(m.sigmas(j, l)) - Scalar(kHalfLog2Pi);
        }
        a(l) = acc;
    }
    return a;
}

template <typename Scalar, typename Derived>
Scalar log_density(const MixtureParams<Scalar>& m, const Eigen::MatrixBase<Derived>& y)
{
    return log_sum_exp(component_log_terms(m, y, 0, m.dims()));
}

/// One-dimensional mixture of output j given y_0..y_{j-1}: component weights are
/// reweighted by the likelihood of the already observed prefix.
template <typename Scalar, typename Derived>
MixtureParams<Scalar> conditional_marginal(const MixtureParams<Scalar>& m, int j, const Eigen::MatrixBase<Derived>& y)
{
    MixtureParams<Scalar> out;
    auto a = component_log_terms(m, y, 0, j);
    out.weights = (a.array() - log_sum_exp(a)).exp().matrix();
    out.means = m.means.row(j);
    out.sigmas = m.sigmas.row(j);
    return out;
}

template <typename Scalar>
Scalar mixture_cdf(const MixtureParams<Scalar>& m, Scalar y, int j = 0)
{
    double acc = 0.0;
    for (int l = 0; l < m.components(); ++l) {
        acc += static_cast<double>(m.weights(l))
               * normal_cdf(static_cast<double>((y - m.means(j, l)) / m.sigmas(j, l)));
    }
    return static_cast<Scalar>(std::clamp(acc, 0.0, 1.0));
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mixture_mean(const MixtureParams<Scalar>& m)
{
    return m.means * m.weights;
}

template <typename Scalar>
int sample_component(const MixtureParams<Scalar>& m, Rng& rng)
{
    const double u = uniform01(rng);
    double cum = 0.0;
    for (int l = 0; l < m.components(); ++l) {
        cum += static_cast<double>(m.weights(l));
        if (u < cum) {
            return l;
        }
    }
    return m.components() - 1;
}

/// One component, then independent Gaussians per output.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mixture_sample(const MixtureParams<Scalar>& m, Rng& rng)
{
    const int l = sample_component(m, rng);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y(m.dims());
    for (int j = 0; j < m.dims(); ++j) {
        y(j) = m.means(j, l) + m.sigmas(j, l) * static_cast<Scalar>(standard_normal(rng));
    }
    return y;
}

/// Affine change of units y_orig = offset + scale * y_std, applied to every component.
template <typename Scalar, typename D1, typename D2>
void rescale(MixtureParams<Scalar>& m, const Eigen::MatrixBase<D1>& offset, const Eigen::MatrixBase<D2>& scale)
{
    m.means = (m.means.array().colwise() * scale.array()).colwise() + offset.array();
    m.sigmas = m.sigmas.array().colwise() * scale.array();
}

}  // namespace acrobench

#endif  // ACROBENCH_MIXTURE_HPP
