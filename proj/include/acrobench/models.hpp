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

#ifndef ACROBENCH_MODELS_HPP
#define ACROBENCH_MODELS_HPP

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "acrobench/acrobot.hpp"
#include "acrobench/mixture.hpp"
#include "acrobench/rng.hpp"
#include "acrobench/trace.hpp"
#include "acrobench/train.hpp"

namespace acrobench {

enum class ModelKind {
    ARLinSigma,  // autoregressive linear regression + uniform residual variance
    DARNNSigma,  // autoregressive MSE nets + uniform residual variance
    DARNNDet,    // mean of DARNNSigma
    DMDN,        // one net, diagonal Gaussian mixture over all outputs
    DARMDN,      // one mixture net per output, chained
    DARMDNDet,   // mean of DARMDN
    Ensemble,    // bagged DMDN(1) (PETS)
    Baseline,    // unconditional independent Gaussian
    Oracle,      // true dynamics
};

struct Capabilities {
    bool has_likelihood = false;
    bool has_cdf = false;
    bool is_deterministic = false;
};

/// Calling a density operation a model does not support.
class CapabilityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelConfig {
    ModelKind kind = ModelKind::DARMDN;
    int components = 1;     // D for DMDN / DARMDN
    int ensemble_size = 5;  // B for Ensemble
    int hidden_width = 100;
    int hidden_layers = 3;
    double sigma_floor = 1e-3;  // standardized units
    TrainConfig train;

    /// Canonical identifier, e.g. "DARMDN(10)_det" or "PETS".
    std::string id() const;

    /// Tuned hyperparameters for `kind`.
    static ModelConfig defaults(ModelKind kind, int components = 1);

    /// Inverse of id(); also accepts "Ensemble(DMDN(1)x5)" and "PETS(B)".
    static ModelConfig parse(std::string_view id);

    void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// x^j = (y^1..y^{j-1}, s): the conditioning of the j-th one-dimensional predictor.
struct AutoregressiveCondition {
    Eigen::VectorXd prefix;  // y^1..y^{j-1}
    Condition base;

    int dim() const noexcept { return static_cast<int>(prefix.size()) + kConditionDim; }
};

/// Per-dimension one-dimensional predictives p_j(. | x^j) for a batch: [j][sample].
using MarginalTable = std::vector<std::vector<Mixture>>;

/// Conditional density model p(y_{t+1} | s_t, a_t). Conditions are kConditionDim x n
/// column batches; observables are d_y x n.
class DensityModel {
public:
    DensityModel(ModelConfig config, Variant variant) : config_(std::move(config)), variant_(variant) {}
    virtual ~DensityModel() = default;

    const ModelConfig& config() const noexcept { return config_; }
    Variant variant() const noexcept { return variant_; }
    int dim() const noexcept { return observable_dim(variant_); }
    std::string id() const { return config_.id(); }
    virtual Capabilities capabilities() const = 0;
    bool fitted() const noexcept { return fitted_; }

    /// Replaces all parameters. Throws FitError on fewer than kMinTrainingSet pairs.
    void fit(const TransitionSet& data);

    /// Diagnostics of the last fit (one entry per trained net).
    const std::vector<TrainReport>& train_reports() const noexcept { return reports_; }

    virtual Eigen::MatrixXd mean_batch(const Eigen::MatrixXd& conditions) const = 0;

    /// One draw per column. `members` selects the ensemble member per column (ignored by
    /// models with a single member). Deterministic models return mean_batch and leave rng untouched.
    virtual Eigen::MatrixXd sample_batch(const Eigen::MatrixXd& conditions, std::span<const int> members,
                                         Rng& rng) const = 0;

    virtual int ensemble_members() const noexcept { return 1; }

    /// p_j(y^j | x^j) for every dimension and column, in original units.
    virtual MarginalTable marginals(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& conditions) const;

    Eigen::VectorXd mean(const Condition& c) const;
    Eigen::VectorXd sample(const Condition& c, Rng& rng) const;

    /// log p(y | c) = sum_j log p_j(y^j | x^j).
    double log_density(const Eigen::VectorXd& y, const Condition& c) const;
    Eigen::VectorXd log_density_terms(const Eigen::VectorXd& y, const Condition& c) const;

    /// F_j(y_j | x^j) with j zero-based.
    double cdf_marginal(int j, double y_j, const AutoregressiveCondition& x) const;

    virtual nlohmann::json to_json() const;

protected:
    virtual void fit_impl(const TransitionSet& data) = 0;
    virtual void params_from_json(const nlohmann::json& j) = 0;
    virtual nlohmann::json params_to_json() const = 0;

    void require_fitted() const;
    void require_likelihood() const;

    std::vector<TrainReport> reports_;

private:
    friend std::unique_ptr<DensityModel> model_from_json(const nlohmann::json& j);

    ModelConfig config_;
    Variant variant_;
    bool fitted_ = false;
};

/// Unfitted model. Throws std::invalid_argument on D < 1 or ensemble size < 2.
std::unique_ptr<DensityModel> make_model(const ModelConfig& config, Variant variant);
std::unique_ptr<DensityModel> make_model(std::string_view id, Variant variant);

/// True dynamics wrapped as a deterministic model; fit is a no-op.
std::unique_ptr<DensityModel> make_oracle(Variant variant);

/// One member index per trajectory, uniform over ensemble members; no RNG use for single-member models.
std::vector<int> draw_members(const DensityModel& model, int count, Rng& rng);

std::unique_ptr<DensityModel> model_from_json(const nlohmann::json& j);
void save_model(const std::string& path, const DensityModel& model);
std::unique_ptr<DensityModel> load_model(const std::string& path);

/// Unconditional independent Gaussian fitted on the targets; the LR baseline.
class BaselineGaussian final : public DensityModel {
public:
    explicit BaselineGaussian(Variant variant);

    Capabilities capabilities() const override { return {true, true, false}; }
    Eigen::MatrixXd mean_batch(const Eigen::MatrixXd& conditions) const override;
    Eigen::MatrixXd sample_batch(const Eigen::MatrixXd& conditions, std::span<const int> members,
                                 Rng& rng) const override;
    MarginalTable marginals(const Eigen::MatrixXd& targets, const Eigen::MatrixXd& conditions) const override;

    const Eigen::VectorXd& means() const noexcept { return mean_; }
    const Eigen::VectorXd& variances() const noexcept { return var_; }

protected:
    void fit_impl(const TransitionSet& data) override;
    void params_from_json(const nlohmann::json& j) override;
    nlohmann::json params_to_json() const override;

private:
    Eigen::VectorXd mean_, var_;
};

}  // namespace acrobench

#endif  // ACROBENCH_MODELS_HPP
