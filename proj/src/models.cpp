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

#include "acrobench/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>

#include <fmt/format.h>

#include "acrobench/losses.hpp"
#include "acrobench/mlp.hpp"
#include "acrobench/parallel.hpp"

namespace acrobench {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXf = Eigen::MatrixXf;
using json = nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

const char* kind_name(ModelKind k)
{
    switch (k) {
    case ModelKind::ARLinSigma: return "ARLin_sigma";
    case ModelKind::DARNNSigma: return "DARNN_sigma";
    case ModelKind::DARNNDet: return "DARNN_det";
    case ModelKind::DMDN: return "DMDN";
    case ModelKind::DARMDN: return "DARMDN";
    case ModelKind::DARMDNDet: return "DARMDN_det";
    case ModelKind::Ensemble: return "PETS";
    case ModelKind::Baseline: return "Baseline";
    case ModelKind::Oracle: return "Oracle";
    }
    return "?";
}

/// Stacks the autoregressive prefix on top of the conditioning rows: x^j = (y^1..y^{j-1}, s, a).
MatrixXd ar_input(const MatrixXd& prefix, int j, const MatrixXd& conditions)
{
    MatrixXd x(j + kConditionDim, conditions.cols());
    if (j > 0) {
        x.topRows(j) = prefix.topRows(j);
    }
    x.bottomRows(kConditionDim) = conditions;
    return x;
}

/// Per-row affine standardization with statistics from the training data.
struct Standardizer {
    VectorXd offset;
    VectorXd scale;

    void fit(const MatrixXd& x)
    {
        const double n = static_cast<double>(x.cols());
        offset = x.rowwise().mean();
        scale = ((x.colwise() - offset).rowwise().squaredNorm() / n).cwiseSqrt();
        for (Eigen::Index i = 0; i < scale.size(); ++i) {
            if (!(scale(i) > 1e-12)) {
                scale(i) = 1.0;
            }
        }
    }

    MatrixXf apply(const MatrixXd& x) const
    {
        return ((x.colwise() - offset).array().colwise() / scale.array()).matrix().cast<float>();
    }

    MatrixXd apply_double(const MatrixXd& x) const
    {
        return ((x.colwise() - offset).array().colwise() / scale.array()).matrix();
    }

    json to_json() const
    {
        return {{"offset", std::vector<double>(offset.data(), offset.data() + offset.size())},
                {"scale", std::vector<double>(scale.data(), scale.data() + scale.size())}};
    }

    void from_json(const json& j)
    {
        const auto o = j.at("offset").get<std::vector<double>>();
        const auto s = j.at("scale").get<std::vector<double>>();
        offset = Eigen::Map<const VectorXd>(o.data(), static_cast<Eigen::Index>(o.size()));
        scale = Eigen::Map<const VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    }
};

json vector_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VectorXd vector_from_json(const json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mlp_json(const Mlp<float>& net)
{
    const auto& s = net.spec();
    const auto& p = net.params();
    return {{"input_dim", s.input_dim},
            {"hidden_widths", s.hidden_widths},
            {"output_dim", s.output_dim},
            {"activation", s.activation == Activation::Relu ? "relu" : "tanh"},
            {"params", std::vector<float>(p.data(), p.data() + p.size())}};
}

Mlp<float> mlp_from_json(const json& j)
{
    MlpSpec s;
    s.input_dim = j.at("input_dim").get<int>();
    s.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
    s.output_dim = j.at("output_dim").get<int>();
    s.activation = j.at("activation").get<std::string>() == "relu" ? Activation::Relu : Activation::Tanh;
    Mlp<float> net(s);
    const auto p = j.at("params").get<std::vector<float>>();
    net.set_params(Eigen::Map<const Eigen::VectorXf>(p.data(), static_cast<Eigen::Index>(p.size())));
    return net;
}

/// A net with standardized inputs and standardized targets.
struct ScaledNet {
    Mlp<float> net;
    Standardizer input;
    Standardizer target;

    MatrixXf raw(const MatrixXd& x) const { return net.forward(input.apply(x)); }

    json to_json() const { return {{"net", mlp_json(net)}, {"input", input.to_json()}, {"target", target.to_json()}}; }

    void from_json(const json& j)
    {
        net = mlp_from_json(j.at("net"));
        input.from_json(j.at("input"));
        target.from_json(j.at("target"));
    }
};

MlpSpec net_spec(const ModelConfig& c, int input_dim, int output_dim)
{
    MlpSpec s;
    s.input_dim = input_dim;
    s.hidden_widths.assign(c.hidden_layers, c.hidden_width);
    s.output_dim = output_dim;
    s.activation = Activation::Relu;
    return s;
}

/// Trains a fresh net on standardized (x, y).
TrainReport fit_scaled_net(ScaledNet& out, const ModelConfig& c, const MatrixXd& x, const MatrixXd& y,
                           const LossSpec& loss, std::uint64_t seed)
{
    out.input.fit(x);
    out.target.fit(y);
    Rng init_rng = make_rng(seed, {0x696e6974u});
    out.net = Mlp<float>::random(net_spec(c, static_cast<int>(x.rows()), loss.output_dim()), init_rng);
    TrainConfig tc = c.train;
    tc.seed = seed;
    const MatrixXf xs = out.input.apply(x);
    const MatrixXf ys = out.target.apply(y);
    TrainReport report = train<float>(out.net, xs, ys, loss, tc);
    if (!std::isfinite(report.best_validation_loss) && report.diverged) {
        throw FitError("training diverged without a finite snapshot: " + report.diagnostic);
    }
    return report;
}

/// Mixture from one column of raw outputs, mapped back to original target units.
Mixture decode_scaled(const Eigen::Ref<const Eigen::VectorXf>& raw, int components, int dims, double floor,
                      const Standardizer& target)
{
    Mixture m = decode_mixture(VectorXd(raw.cast<double>()), components, dims, floor);
    rescale(m, target.offset, target.scale);
    return m;
}

/// Mean of a one-dimensional mixture straight from one column of raw outputs.
double raw_mean_1d(const float* raw, int components, const Standardizer& target)
{
    const float mx = *std::max_element(raw, raw + components);
    double total = 0.0;
    double acc = 0.0;
    for (int l = 0; l < components; ++l) {
        const double w = std::exp(static_cast<double>(raw[l] - mx));
        total += w;
        acc += w * raw[components + l];
    }
    return target.offset(0) + target.scale(0) * acc / total;
}

/// Same draw as mixture_sample on the decoded mixture, without materializing it.
double raw_sample_1d(const float* raw, int components, double floor, const Standardizer& target, Rng& rng)
{
    const float mx = *std::max_element(raw, raw + components);
    double total = 0.0;
    for (int l = 0; l < components; ++l) {
        total += std::exp(static_cast<double>(raw[l] - mx));
    }
    const double u = uniform01(rng) * total;
    double cum = 0.0;
    int pick = components - 1;
    for (int l = 0; l < components; ++l) {
        cum += std::exp(static_cast<double>(raw[l] - mx));
        if (u < cum) {
            pick = l;
            break;
        }
    }
    const double mu = raw[components + pick];
    const double sigma = softplus(static_cast<double>(raw[2 * components + pick])) + floor;
    return target.offset(0) + target.scale(0) * (mu + sigma * standard_normal(rng));
}

Mixture single_gaussian(double mu, double sigma)
{
    Mixture m;
    m.weights = VectorXd::Ones(1);
    m.means = MatrixXd::Constant(1, 1, mu);
    m.sigmas = MatrixXd::Constant(1, 1, sigma);
    return m;
}

// ---------------------------------------------------------------------------

class LinearArModel final : public DensityModel {
public:
    using DensityModel::DensityModel;

    Capabilities capabilities() const override { return {true, true, false}; }

    MatrixXd mean_batch(const MatrixXd& conditions) const override
    {
        require_fitted();
        MatrixXd y(dim(), conditions.cols());
        for (int j = 0; j < dim(); ++j) {
            y.row(j) = predict(j, ar_input(y, j, conditions));
        }
        return y;
    }

    MatrixXd sample_batch(const MatrixXd& conditions, std::span<const int>, Rng& rng) const override
    {
        require_fitted();
        MatrixXd y(dim(), conditions.cols());
        for (int j = 0; j < dim(); ++j) {
            y.row(j) = predict(j, ar_input(y, j, conditions));
            for (Eigen::Index c = 0; c < y.cols(); ++c) {
                y(j, c) += sigma_(j) * standard_normal(rng);
            }
        }
        return y;
    }

    MarginalTable marginals(const MatrixXd& targets, const MatrixXd& conditions) const override
    {
        require_fitted();
        MarginalTable out(dim());
        for (int j = 0; j < dim(); ++j) {
            const Eigen::RowVectorXd mu = predict(j, ar_input(targets, j, conditions));
            out[j].reserve(mu.size());
            for (Eigen::Index c = 0; c < mu.size(); ++c) {
                out[j].push_back(single_gaussian(mu(c), sigma_(j)));
            }
        }
        return out;
    }

    const VectorXd& sigmas() const noexcept { return sigma_; }

protected:
    void fit_impl(const TransitionSet& data) override
    {
        const int n = data.size();
        coef_.assign(dim(), {});
        sigma_.resize(dim());
        for (int j = 0; j < dim(); ++j) {
            const MatrixXd x = ar_input(data.targets, j, data.conditions);
            MatrixXd design(n, x.rows() + 1);
            design.leftCols(x.rows()) = x.transpose();
            design.col(x.rows()).setOnes();
            const VectorXd target = data.targets.row(j).transpose();
            coef_[j] = design.completeOrthogonalDecomposition().solve(target);
            const double rss = (design * coef_[j] - target).squaredNorm();
            sigma_(j) = std::max(std::sqrt(rss / static_cast<double>(n - 1)), 1e-300);
        }
    }

    json params_to_json() const override
    {
        json coefs = json::array();
        for (const auto& c : coef_) {
            coefs.push_back(vector_json(c));
        }
        return {{"coefficients", coefs}, {"sigma", vector_json(sigma_)}};
    }

    void params_from_json(const json& j) override
    {
        coef_.clear();
        for (const auto& c : j.at("coefficients")) {
            coef_.push_back(vector_from_json(c));
        }
        sigma_ = vector_from_json(j.at("sigma"));
    }

private:
    Eigen::RowVectorXd predict(int j, const MatrixXd& x) const
    {
        const auto& b = coef_[j];
        Eigen::RowVectorXd out = b.head(x.rows()).transpose() * x;
        out.array() += b(x.rows());
        return out;
    }

    std::vector<VectorXd> coef_;
    VectorXd sigma_;
};

// ---------------------------------------------------------------------------

/// One net per output dimension, chained in index order. Regression nets (DARNN) carry a
/// uniform residual sigma; mixture nets (DARMDN) emit 3D raw outputs per dimension.
class NetArModel final : public DensityModel {
public:
    using DensityModel::DensityModel;

    Capabilities capabilities() const override
    {
        return deterministic() ? Capabilities{false, false, true} : Capabilities{true, true, false};
    }

    MatrixXd mean_batch(const MatrixXd& conditions) const override
    {
        require_fitted();
        MatrixXd y(dim(), conditions.cols());
        for (int j = 0; j < dim(); ++j) {
            const MatrixXf raw = nets_[j].raw(ar_input(y, j, conditions));
            if (mixture()) {
                for (Eigen::Index c = 0; c < raw.cols(); ++c) {
                    y(j, c) = raw_mean_1d(raw.col(c).data(), config().components, nets_[j].target);
                }
            } else {
                y.row(j) = target_units(j, raw.row(0));
            }
        }
        return y;
    }

    MatrixXd sample_batch(const MatrixXd& conditions, std::span<const int> members, Rng& rng) const override
    {
        if (deterministic()) {
            return mean_batch(conditions);
        }
        require_fitted();
        MatrixXd y(dim(), conditions.cols());
        for (int j = 0; j < dim(); ++j) {
            const MatrixXf raw = nets_[j].raw(ar_input(y, j, conditions));
            if (mixture()) {
                for (Eigen::Index c = 0; c < raw.cols(); ++c) {
                    y(j, c) = raw_sample_1d(raw.col(c).data(), config().components, config().sigma_floor,
                                            nets_[j].target, rng);
                }
            } else {
                y.row(j) = target_units(j, raw.row(0));
                for (Eigen::Index c = 0; c < raw.cols(); ++c) {
                    y(j, c) += sigma_(j) * standard_normal(rng);
                }
            }
        }
        (void)members;
        return y;
    }

    MarginalTable marginals(const MatrixXd& targets, const MatrixXd& conditions) const override
    {
        require_likelihood();
        MarginalTable out(dim());
        for (int j = 0; j < dim(); ++j) {
            const MatrixXf raw = nets_[j].raw(ar_input(targets, j, conditions));
            out[j].reserve(raw.cols());
            if (mixture()) {
                for (Eigen::Index c = 0; c < raw.cols(); ++c) {
                    out[j].push_back(decode(j, raw.col(c)));
                }
            } else {
                const Eigen::RowVectorXd mu = target_units(j, raw.row(0));
                for (Eigen::Index c = 0; c < raw.cols(); ++c) {
                    out[j].push_back(single_gaussian(mu(c), sigma_(j)));
                }
            }
        }
        return out;
    }

    int raw_outputs_per_dim() const { return mixture() ? mixture_raw_size(config().components, 1) : 1; }

protected:
    void fit_impl(const TransitionSet& data) override
    {
        const int d = dim();
        std::vector<ScaledNet> nets(d);
        std::vector<TrainReport> reports(d);
        VectorXd sigma = VectorXd::Zero(d);
        LossSpec loss;
        if (mixture()) {
            loss.kind = LossKind::MixtureNll;
            loss.components = config().components;
            loss.sigma_floor = config().sigma_floor;
        } else {
            loss.kind = LossKind::Mse;
        }
        loss.dims = 1;
        parallel_for(d, [&](int j) {
            const MatrixXd x = ar_input(data.targets, j, data.conditions);
            const MatrixXd y = data.targets.row(j);
            reports[j] = fit_scaled_net(nets[j], config(), x, y, loss,
                                        derive_seed(config().train.seed, {static_cast<std::uint64_t>(j)}));
            if (!mixture()) {
                const MatrixXf raw = nets[j].raw(x);
                const Eigen::RowVectorXd pred =
                    (raw.row(0).cast<double>().array() * nets[j].target.scale(0) + nets[j].target.offset(0)).matrix();
                const double rss = (y.row(0) - pred).squaredNorm();
                sigma(j) = std::max(std::sqrt(rss / static_cast<double>(data.size() - 1)), 1e-300);
            }
        });
        nets_ = std::move(nets);
        sigma_ = sigma;
        reports_ = std::move(reports);
    }

    json params_to_json() const override
    {
        json nets = json::array();
        for (const auto& n : nets_) {
            nets.push_back(n.to_json());
        }
        return {{"nets", nets}, {"sigma", vector_json(sigma_)}};
    }

    void params_from_json(const json& j) override
    {
        nets_.clear();
        for (const auto& n : j.at("nets")) {
            nets_.emplace_back();
            nets_.back().from_json(n);
        }
        sigma_ = vector_from_json(j.at("sigma"));
    }

private:
    bool mixture() const
    {
        return config().kind == ModelKind::DARMDN || config().kind == ModelKind::DARMDNDet;
    }

    bool deterministic() const
    {
        return config().kind == ModelKind::DARNNDet || config().kind == ModelKind::DARMDNDet;
    }

    Mixture decode(int j, const Eigen::Ref<const Eigen::VectorXf>& raw) const
    {
        return decode_scaled(raw, config().components, 1, config().sigma_floor, nets_[j].target);
    }

    Eigen::RowVectorXd target_units(int j, const Eigen::RowVectorXf& raw) const
    {
        return (raw.cast<double>().array() * nets_[j].target.scale(0) + nets_[j].target.offset(0)).matrix();
    }

    std::vector<ScaledNet> nets_;
    VectorXd sigma_;
};

// ---------------------------------------------------------------------------

/// One net emitting a diagonal Gaussian mixture over all outputs.
class MdnModel final : public DensityModel {
public:
    using DensityModel::DensityModel;

    Capabilities capabilities() const override { return {true, true, false}; }

    std::vector<Mixture> mixtures(const MatrixXd& conditions) const
    {
        require_fitted();
        const MatrixXf raw = net_.raw(conditions);
        std::vector<Mixture> out;
        out.reserve(raw.cols());
        for (Eigen::Index c = 0; c < raw.cols(); ++c) {
            out.push_back(decode_scaled(raw.col(c), config().components, dim(), config().sigma_floor, net_.target));
        }
        return out;
    }

    MatrixXd mean_batch(const MatrixXd& conditions) const override
    {
        const auto ms = mixtures(conditions);
        MatrixXd y(dim(), conditions.cols());
        for (std::size_t c = 0; c < ms.size(); ++c) {
            y.col(c) = mixture_mean(ms[c]);
        }
        return y;
    }

    MatrixXd sample_batch(const MatrixXd& conditions, std::span<const int>, Rng& rng) const override
    {
        const auto ms = mixtures(conditions);
        MatrixXd y(dim(), conditions.cols());
        for (std::size_t c = 0; c < ms.size(); ++c) {
            y.col(c) = mixture_sample(ms[c], rng);
        }
        return y;
    }

    MarginalTable marginals(const MatrixXd& targets, const MatrixXd& conditions) const override
    {
        const auto ms = mixtures(conditions);
        MarginalTable out(dim());
        for (int j = 0; j < dim(); ++j) {
            out[j].reserve(ms.size());
            for (std::size_t c = 0; c < ms.size(); ++c) {
                out[j].push_back(conditional_marginal(ms[c], j, targets.col(c)));
            }
        }
        return out;
    }

protected:
    void fit_impl(const TransitionSet& data) override
    {
        LossSpec loss;
        loss.kind = LossKind::MixtureNll;
        loss.components = config().components;
        loss.dims = dim();
        loss.sigma_floor = config().sigma_floor;
        ScaledNet net;
        reports_ = {fit_scaled_net(net, config(), data.conditions, data.targets, loss, config().train.seed)};
        net_ = std::move(net);
    }

    json params_to_json() const override { return net_.to_json(); }
    void params_from_json(const json& j) override { net_.from_json(j); }

private:
    ScaledNet net_;
};

// ---------------------------------------------------------------------------

/// Bagged DMDN(1) members; p(y|s) is the equal-weight mixture of the members.
class EnsembleModel final : public DensityModel {
public:
    EnsembleModel(ModelConfig config, Variant variant) : DensityModel(std::move(config), variant) {}

    Capabilities capabilities() const override { return {true, true, false}; }
    int ensemble_members() const noexcept override { return config().ensemble_size; }

    MatrixXd mean_batch(const MatrixXd& conditions) const override
    {
        require_fitted();
        MatrixXd y = MatrixXd::Zero(dim(), conditions.cols());
        for (const auto& m : members_) {
            y += m->mean_batch(conditions);
        }
        return y / static_cast<double>(members_.size());
    }

    MatrixXd sample_batch(const MatrixXd& conditions, std::span<const int> members, Rng& rng) const override
    {
        require_fitted();
        const Eigen::Index n = conditions.cols();
        std::vector<int> assigned;
        if (members.empty()) {
            assigned = draw_members(*this, static_cast<int>(n), rng);
            members = assigned;
        }
        if (static_cast<Eigen::Index>(members.size()) != n) {
            throw std::invalid_argument("sample_batch: one member index per column required");
        }
        MatrixXd y(dim(), n);
        for (int b = 0; b < ensemble_members(); ++b) {
            std::vector<int> cols;
            for (Eigen::Index c = 0; c < n; ++c) {
                if (members[c] == b) {
                    cols.push_back(static_cast<int>(c));
                }
            }
            if (cols.empty()) {
                continue;
            }
            const MatrixXd part = members_[b]->sample_batch(conditions(Eigen::all, cols), {}, rng);
            y(Eigen::all, cols) = part;
        }
        return y;
    }

    MarginalTable marginals(const MatrixXd& targets, const MatrixXd& conditions) const override
    {
        require_fitted();
        const int nb = ensemble_members();
        std::vector<std::vector<Mixture>> per_member(nb);
        for (int b = 0; b < nb; ++b) {
            per_member[b] = members_[b]->mixtures(conditions);
        }
        MarginalTable out(dim());
        for (int j = 0; j < dim(); ++j) {
            out[j].reserve(conditions.cols());
        }
        for (Eigen::Index c = 0; c < conditions.cols(); ++c) {
            Mixture joint;
            const int D = per_member[0][c].components();
            joint.weights.resize(nb * D);
            joint.means.resize(dim(), nb * D);
            joint.sigmas.resize(dim(), nb * D);
            for (int b = 0; b < nb; ++b) {
                const auto& m = per_member[b][c];
                joint.weights.segment(b * D, D) = m.weights / static_cast<double>(nb);
                joint.means.middleCols(b * D, D) = m.means;
                joint.sigmas.middleCols(b * D, D) = m.sigmas;
            }
            for (int j = 0; j < dim(); ++j) {
                out[j].push_back(conditional_marginal(joint, j, targets.col(c)));
            }
        }
        return out;
    }

protected:
    void fit_impl(const TransitionSet& data) override
    {
        const int nb = config().ensemble_size;
        const int n = data.size();
        std::vector<std::unique_ptr<MdnModel>> members(nb);
        std::vector<TrainReport> reports(nb);
        parallel_for(nb, [&](int b) {
            Rng boot = make_rng(config().train.seed, {0x626f6f74u, static_cast<std::uint64_t>(b)});
            std::vector<int> idx(n);
            for (int& i : idx) {
                i = uniform_index(boot, n);
            }
            TransitionSet resampled;
            resampled.conditions = data.conditions(Eigen::all, idx);
            resampled.targets = data.targets(Eigen::all, idx);
            members[b] = std::make_unique<MdnModel>(member_config(b), variant());
            members[b]->fit(resampled);
            reports[b] = members[b]->train_reports().front();
        });
        members_ = std::move(members);
        reports_ = std::move(reports);
    }

    json params_to_json() const override
    {
        json arr = json::array();
        for (const auto& m : members_) {
            arr.push_back(m->to_json());
        }
        return {{"members", arr}};
    }

    void params_from_json(const json& j) override
    {
        members_.clear();
        for (const auto& m : j.at("members")) {
            auto model = model_from_json(m);
            auto* mdn = dynamic_cast<MdnModel*>(model.get());
            if (mdn == nullptr) {
                throw std::runtime_error("ensemble member is not a DMDN model");
            }
            model.release();
            members_.emplace_back(mdn);
        }
    }

private:
    ModelConfig member_config(int b) const
    {
        ModelConfig c = config();
        c.kind = ModelKind::DMDN;
        c.components = 1;
        c.train.seed = derive_seed(config().train.seed, {0x6d656d62u, static_cast<std::uint64_t>(b)});
        return c;
    }

    std::vector<std::unique_ptr<MdnModel>> members_;
};

// ---------------------------------------------------------------------------

class OracleModel final : public DensityModel {
public:
    explicit OracleModel(Variant variant) : DensityModel(ModelConfig::defaults(ModelKind::Oracle), variant) {}

    Capabilities capabilities() const override { return {false, false, true}; }

    MatrixXd mean_batch(const MatrixXd& conditions) const override
    {
        MatrixXd y(dim(), conditions.cols());
        for (Eigen::Index c = 0; c < conditions.cols(); ++c) {
            const FeatureVector f = conditions.col(c).head<kFeatureDim>();
            const Action a = action_from_int(static_cast<int>(std::lround(conditions(kFeatureDim, c))));
            y.col(c) = observe(step(state_from_features(f), a), variant());
        }
        return y;
    }

    MatrixXd sample_batch(const MatrixXd& conditions, std::span<const int>, Rng&) const override
    {
        return mean_batch(conditions);
    }

protected:
    void fit_impl(const TransitionSet&) override {}
    json params_to_json() const override { return json::object(); }
    void params_from_json(const json&) override {}
};

}  // namespace

// ---------------------------------------------------------------------------

std::string ModelConfig::id() const
{
    switch (kind) {
    case ModelKind::DMDN: return fmt::format("DMDN({})", components);
    case ModelKind::DARMDN: return fmt::format("DARMDN({})", components);
    case ModelKind::DARMDNDet: return fmt::format("DARMDN({})_det", components);
    case ModelKind::Ensemble: return ensemble_size == 5 ? "PETS" : fmt::format("PETS({})", ensemble_size);
    default: return kind_name(kind);
    }
}

ModelConfig ModelConfig::defaults(ModelKind kind, int components)
{
    ModelConfig c;
    c.kind = kind;
    c.components = components;
    switch (kind) {
    case ModelKind::DARNNSigma:
    case ModelKind::DARNNDet:
        c.components = 1;
        c.train.learning_rate = 4e-3;
        c.hidden_width = 200;
        c.hidden_layers = 3;
        c.train.validation_fraction = 0.05;
        c.train.epochs = 100;
        break;
    case ModelKind::DMDN:
        c.train.learning_rate = 5e-3;
        c.hidden_width = 200;
        c.hidden_layers = 3;
        c.train.validation_fraction = 0.1;
        c.train.epochs = 300;
        break;
    case ModelKind::DARMDN:
    case ModelKind::DARMDNDet:
        c.train.learning_rate = 1e-3;
        c.hidden_width = components <= 1 ? 50 : 100;
        c.hidden_layers = 3;
        c.train.validation_fraction = 0.1;
        c.train.epochs = 300;
        break;
    case ModelKind::Ensemble:
        c.components = 1;
        c.ensemble_size = 5;
        c.train.learning_rate = 1e-3;
        c.hidden_width = 200;
        c.hidden_layers = 3;
        c.train.validation_fraction = 0.1;
        c.train.epochs = 100;
        break;
    case ModelKind::ARLinSigma:
    case ModelKind::Baseline:
    case ModelKind::Oracle:
        c.components = 1;
        break;
    }
    return c;
}

ModelConfig ModelConfig::parse(std::string_view id_view)
{
    const std::string id(id_view);
    std::smatch m;
    static const std::regex mixture_re(R"((DMDN|DARMDN)\((\d+)\)(_det)?)");
    static const std::regex pets_re(R"(PETS(?:\((\d+)\))?|Ensemble\(DMDN\(1\)[x\*](\d+)\))");
    if (std::regex_match(id, m, mixture_re)) {
        const int d = std::stoi(m[2].str());
        if (m[1] == "DMDN") {
            if (m[3].matched) {
                throw std::invalid_argument("DMDN has no deterministic variant: " + id);
            }
            ModelConfig c = defaults(ModelKind::DMDN, d);
            c.validate();
            return c;
        }
        ModelConfig c = defaults(m[3].matched ? ModelKind::DARMDNDet : ModelKind::DARMDN, d);
        c.validate();
        return c;
    }
    if (std::regex_match(id, m, pets_re)) {
        ModelConfig c = defaults(ModelKind::Ensemble);
        if (m[1].matched) {
            c.ensemble_size = std::stoi(m[1].str());
        } else if (m[2].matched) {
            c.ensemble_size = std::stoi(m[2].str());
        }
        c.validate();
        return c;
    }
    for (ModelKind k : {ModelKind::ARLinSigma, ModelKind::DARNNSigma, ModelKind::DARNNDet, ModelKind::Baseline,
                        ModelKind::Oracle}) {
        if (id == kind_name(k)) {
            return defaults(k);
        }
    }
    if (id == "ARLin") {
        return defaults(ModelKind::ARLinSigma);
    }
    throw std::invalid_argument("unknown model kind: " + id);
}

void ModelConfig::validate() const
{
    if (components < 1) {
        throw std::invalid_argument("model config: number of components must be >= 1");
    }
    if (kind == ModelKind::Ensemble && ensemble_size < 2) {
        throw std::invalid_argument("model config: ensemble size must be >= 2");
    }
    if (hidden_width < 1 || hidden_layers < 0) {
        throw std::invalid_argument("model config: bad network shape");
    }
    if (!(sigma_floor > 0.0)) {
        throw std::invalid_argument("model config: sigma floor must be > 0");
    }
    train.validate();
}

void to_json(json& j, const ModelConfig& c)
{
    j = json{{"id", c.id()},
             {"components", c.components},
             {"ensemble_size", c.ensemble_size},
             {"hidden_width", c.hidden_width},
             {"hidden_layers", c.hidden_layers},
             {"sigma_floor", c.sigma_floor},
             {"learning_rate", c.train.learning_rate},
             {"epochs", c.train.epochs},
             {"batch_size", c.train.batch_size},
             {"validation_fraction", c.train.validation_fraction},
             {"seed", c.train.seed},
             {"adam_beta1", c.train.beta1},
             {"adam_beta2", c.train.beta2},
             {"adam_epsilon", c.train.epsilon}};
}

void from_json(const json& j, ModelConfig& c)
{
    c = ModelConfig::parse(j.at("id").get<std::string>());
    c.components = j.value("components", c.components);
    c.ensemble_size = j.value("ensemble_size", c.ensemble_size);
    c.hidden_width = j.value("hidden_width", c.hidden_width);
    c.hidden_layers = j.value("hidden_layers", c.hidden_layers);
    c.sigma_floor = j.value("sigma_floor", c.sigma_floor);
    c.train.learning_rate = j.value("learning_rate", c.train.learning_rate);
    c.train.epochs = j.value("epochs", c.train.epochs);
    c.train.batch_size = j.value("batch_size", c.train.batch_size);
    c.train.validation_fraction = j.value("validation_fraction", c.train.validation_fraction);
    c.train.seed = j.value("seed", c.train.seed);
    c.train.beta1 = j.value("adam_beta1", c.train.beta1);
    c.train.beta2 = j.value("adam_beta2", c.train.beta2);
    c.train.epsilon = j.value("adam_epsilon", c.train.epsilon);
}

// ---------------------------------------------------------------------------

void DensityModel::fit(const TransitionSet& data)
{
    if (data.size() < kMinTrainingSet) {
        throw FitError(fmt::format("{}: need at least {} transitions, got {}", id(), kMinTrainingSet, data.size()));
    }
    if (data.targets.rows() != dim() || data.conditions.rows() != kConditionDim) {
        throw FitError(id() + ": transition set does not match the model variant");
    }
    reports_.clear();
    fit_impl(data);
    fitted_ = true;
}

void DensityModel::require_fitted() const
{
    if (!fitted_) {
        throw std::logic_error(id() + ": model is not fitted");
    }
}

void DensityModel::require_likelihood() const
{
    if (!capabilities().has_likelihood) {
        throw CapabilityError(id() + " is deterministic and has no likelihood");
    }
    require_fitted();
}

MarginalTable DensityModel::marginals(const MatrixXd&, const MatrixXd&) const
{
    throw CapabilityError(id() + " has no density");
}

VectorXd DensityModel::mean(const Condition& c) const
{
    return mean_batch(MatrixXd(c)).col(0);
}

VectorXd DensityModel::sample(const Condition& c, Rng& rng) const
{
    return sample_batch(MatrixXd(c), {}, rng).col(0);
}

VectorXd DensityModel::log_density_terms(const VectorXd& y, const Condition& c) const
{
    require_likelihood();
    const auto table = marginals(MatrixXd(y), MatrixXd(c));
    VectorXd out(dim());
    for (int j = 0; j < dim(); ++j) {
        out(j) = acrobench::log_density(table[j][0], Eigen::VectorXd::Constant(1, y(j)));
    }
    return out;
}

double DensityModel::log_density(const VectorXd& y, const Condition& c) const
{
    return log_density_terms(y, c).sum();
}

double DensityModel::cdf_marginal(int j, double y_j, const AutoregressiveCondition& x) const
{
    if (!capabilities().has_cdf) {
        throw CapabilityError(id() + " has no CDF");
    }
    if (j < 0 || j >= dim() || x.prefix.size() != j) {
        throw std::invalid_argument("cdf_marginal: prefix length must equal the dimension index");
    }
    VectorXd y = VectorXd::Zero(dim());
    y.head(j) = x.prefix;
    y(j) = y_j;
    const auto table = marginals(MatrixXd(y), MatrixXd(x.base));
    return mixture_cdf(table[j][0], y_j);
}

json DensityModel::to_json() const
{
    return {{"format", "acrobench-model"},
            {"version", kFormatVersion},
            {"variant", to_string(variant_)},
            {"config", config_},
            {"fitted", fitted_},
            {"params", fitted_ ? params_to_json() : json::object()}};
}

// ---------------------------------------------------------------------------

BaselineGaussian::BaselineGaussian(Variant variant)
    : DensityModel(ModelConfig::defaults(ModelKind::Baseline), variant)
{
}

void BaselineGaussian::fit_impl(const TransitionSet& data)
{
    const double n = static_cast<double>(data.size());
    mean_ = data.targets.rowwise().mean();
    var_ = (data.targets.colwise() - mean_).rowwise().squaredNorm() / n;
    var_ = var_.cwiseMax(1e-300);
}

MatrixXd BaselineGaussian::mean_batch(const MatrixXd& conditions) const
{
    require_fitted();
    return mean_.replicate(1, conditions.cols());
}

MatrixXd BaselineGaussian::sample_batch(const MatrixXd& conditions, std::span<const int>, Rng& rng) const
{
    require_fitted();
    MatrixXd y(dim(), conditions.cols());
    for (Eigen::Index c = 0; c < y.cols(); ++c) {
        for (int j = 0; j < dim(); ++j) {
            y(j, c) = mean_(j) + std::sqrt(var_(j)) * standard_normal(rng);
        }
    }
    return y;
}

MarginalTable BaselineGaussian::marginals(const MatrixXd&, const MatrixXd& conditions) const
{
    require_fitted();
    MarginalTable out(dim());
    for (int j = 0; j < dim(); ++j) {
        out[j].assign(conditions.cols(), single_gaussian(mean_(j), std::sqrt(var_(j))));
    }
    return out;
}

json BaselineGaussian::params_to_json() const
{
    return {{"mean", vector_json(mean_)}, {"variance", vector_json(var_)}};
}

void BaselineGaussian::params_from_json(const json& j)
{
    mean_ = vector_from_json(j.at("mean"));
    var_ = vector_from_json(j.at("variance"));
}

// ---------------------------------------------------------------------------

std::unique_ptr<DensityModel> make_model(const ModelConfig& config, Variant variant)
{
    config.validate();
    switch (config.kind) {
    case ModelKind::ARLinSigma: return std::make_unique<LinearArModel>(config, variant);
    case ModelKind::DARNNSigma:
    case ModelKind::DARNNDet:
    case ModelKind::DARMDN:
    case ModelKind::DARMDNDet: return std::make_unique<NetArModel>(config, variant);
    case ModelKind::DMDN: return std::make_unique<MdnModel>(config, variant);
    case ModelKind::Ensemble: return std::make_unique<EnsembleModel>(config, variant);
    case ModelKind::Baseline: return std::make_unique<BaselineGaussian>(variant);
    case ModelKind::Oracle: return std::make_unique<OracleModel>(variant);
    }
    throw std::invalid_argument("make_model: unknown kind");
}

std::unique_ptr<DensityModel> make_model(std::string_view id, Variant variant)
{
    return make_model(ModelConfig::parse(id), variant);
}

std::unique_ptr<DensityModel> make_oracle(Variant variant)
{
    return std::make_unique<OracleModel>(variant);
}

std::vector<int> draw_members(const DensityModel& model, int count, Rng& rng)
{
    const int b = model.ensemble_members();
    std::vector<int> out(count, 0);
    if (b > 1) {
        for (int& m : out) {
            m = uniform_index(rng, b);
        }
    }
    return out;
}

std::unique_ptr<DensityModel> model_from_json(const json& j)
{
    if (j.value("format", "") != "acrobench-model") {
        throw std::runtime_error("not an acrobench model file");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
        throw std::runtime_error("unsupported model file version " + j.at("version").dump());
    }
    const Variant variant = parse_variant(j.at("variant").get<std::string>());
    const ModelConfig config = j.at("config").get<ModelConfig>();
    auto model = make_model(config, variant);
    if (j.value("fitted", false)) {
        model->params_from_json(j.at("params"));
        model->fitted_ = true;
    }
    return model;
}

void save_model(const std::string& path, const DensityModel& model)
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    os << model.to_json().dump() << '\n';
}

std::unique_ptr<DensityModel> load_model(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open " + path);
    }
    return model_from_json(json::parse(is));
}

}  // namespace acrobench
