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

#ifndef ACROBENCH_TRAIN_HPP
#define ACROBENCH_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acrobench/losses.hpp"
#include "acrobench/mlp.hpp"
#include "acrobench/rng.hpp"

namespace acrobench {

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 100;
    int batch_size = 32;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const
    {
        if (!(learning_rate > 0.0)) {
            throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
        }
        if (epochs < 1) {
            throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        }
        if (batch_size < 1) {
            throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
        }
        if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
            throw std::invalid_argument("TrainConfig: validation_fraction must be in (0, 1)");
        }
    }
};

struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> validation_loss;
    int best_epoch = 0;  // 0 = initial parameters
    double best_validation_loss = std::numeric_limits<double>::infinity();
    int train_size = 0;
    int validation_size = 0;
    bool diverged = false;
    std::string diagnostic;
};

inline constexpr int kMinTrainingSet = 10;

/// Fisher-Yates permutation of 0..n-1.
inline std::vector<int> shuffled_indices(int n, Rng& rng)
{
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        std::swap(idx[i], idx[uniform_index(rng, i + 1)]);
    }
    return idx;
}

/// Minibatch Adam on (x, y) (columns are samples). A random validation_fraction of the
/// columns is held out; the net is left at the parameters with the lowest validation
/// loss seen (initial parameters included). A non-finite training loss stops training
/// and flags the report.
template <typename Scalar>
TrainReport train(Mlp<Scalar>& net, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& y, const LossSpec& loss,
                  const TrainConfig& cfg)
{
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    cfg.validate();
    const int n = static_cast<int>(x.cols());
    if (n < kMinTrainingSet) {
        throw std::invalid_argument("train: need at least " + std::to_string(kMinTrainingSet) + " samples, got "
                                    + std::to_string(n));
    }
    if (y.cols() != n || x.rows() != net.input_dim() || loss.output_dim() != net.output_dim()) {
        throw std::invalid_argument("train: data and net shapes disagree");
    }

    Rng rng = make_rng(cfg.seed, {0x7472u});
    const std::vector<int> perm = shuffled_indices(n, rng);
    const int n_val = std::clamp(static_cast<int>(std::lround(cfg.validation_fraction * n)), 1, n - 1);
    const std::vector<int> val_idx(perm.begin(), perm.begin() + n_val);
    std::vector<int> train_idx(perm.begin() + n_val, perm.end());
    const Matrix x_val = x(Eigen::all, val_idx);
    const Matrix y_val = y(Eigen::all, val_idx);

    TrainReport report;
    report.train_size = static_cast<int>(train_idx.size());
    report.validation_size = n_val;

    auto validation_loss = [&] {
        return static_cast<double>(evaluate_loss<Scalar>(loss, net.forward(x_val), y_val).loss);
    };

    Vector best = net.params();
    report.best_validation_loss = validation_loss();
    if (!std::isfinite(report.best_validation_loss)) {
        report.best_validation_loss = std::numeric_limits<double>::infinity();
    }

    Adam<Scalar> adam(net.num_params(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    typename Mlp<Scalar>::Tape tape;
    std::vector<int> batch;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (int i = static_cast<int>(train_idx.size()) - 1; i > 0; --i) {
            std::swap(train_idx[i], train_idx[uniform_index(rng, i + 1)]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(train_idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.assign(train_idx.begin() + start, train_idx.begin() + stop);
            const Matrix xb = x(Eigen::all, batch);
            const Matrix yb = y(Eigen::all, batch);
            net.forward(xb, tape);
            const auto lv = evaluate_loss<Scalar>(loss, tape.output, yb);
            if (!std::isfinite(static_cast<double>(lv.loss))) {
                report.diverged = true;
                report.diagnostic = "non-finite training loss at epoch " + std::to_string(epoch);
                break;
            }
            epoch_loss += static_cast<double>(lv.loss) * static_cast<double>(stop - start);
            const Vector grad = net.backward(tape, lv.grad);
            adam.step(net.params(), grad);
        }
        if (report.diverged) {
            break;
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));
        const double v = validation_loss();
        report.validation_loss.push_back(v);
        if (std::isfinite(v) && v < report.best_validation_loss) {
            report.best_validation_loss = v;
            report.best_epoch = epoch;
            best = net.params();
        }
    }
    net.params() = best;
    return report;
}

}  // namespace acrobench

#endif  // ACROBENCH_TRAIN_HPP
