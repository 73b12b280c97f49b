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

#include "acrobench/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "acrobench/parallel.hpp"

namespace acrobench {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

TransitionSet checked_transitions(const Trace& trace)
{
    TransitionSet data = transitions(trace);
    if (data.size() < 1) {
        throw std::invalid_argument("metrics: the trace has no within-episode step pair");
    }
    return data;
}

double one_dim_log_density(const Mixture& m, double y)
{
    Eigen::Matrix<double, 1, 1> v;
    v(0) = y;
    return log_density(m, v);
}

DimensionScore average_rows(const VectorXd& per_dim, std::vector<int> excluded)
{
    DimensionScore s;
    s.per_dimension = per_dim;
    s.excluded = std::move(excluded);
    double acc = 0.0;
    int used = 0;
    for (Eigen::Index j = 0; j < per_dim.size(); ++j) {
        if (std::find(s.excluded.begin(), s.excluded.end(), j) == s.excluded.end()) {
            acc += per_dim(j);
            ++used;
        }
    }
    s.value = used > 0 ? acc / used : kNaN;
    return s;
}

VectorXd population_variance(const MatrixXd& targets)
{
    const VectorXd mean = targets.rowwise().mean();
    return (targets.colwise() - mean).rowwise().squaredNorm() / static_cast<double>(targets.cols());
}

Metric single(std::optional<double> v, const VectorXd& per_dim = {})
{
    Metric m;
    m.value = v;
    m.per_dimension.assign(per_dim.data(), per_dim.data() + per_dim.size());
    return m;
}

json metric_json(const Metric& m)
{
    json per = json::array();
    for (double v : m.per_dimension) {
        per.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    }
    return {{"value", m.value ? json(*m.value) : json(nullptr)}, {"ci90", m.ci90}, {"per_dimension", per}};
}

Metric metric_from_json(const json& j)
{
    Metric m;
    if (!j.at("value").is_null()) {
        m.value = j.at("value").get<double>();
    }
    m.ci90 = j.at("ci90").get<double>();
    for (const auto& v : j.at("per_dimension")) {
        m.per_dimension.push_back(v.is_null() ? kNaN : v.get<double>());
    }
    return m;
}

std::string cell(const std::optional<double>& v)
{
    return v ? fmt::format("{:.17g}", *v) : std::string();
}

}  // namespace

MatrixXd log_likelihood_terms(const DensityModel& model, const TransitionSet& data)
{
    if (!model.capabilities().has_likelihood) {
        throw CapabilityError(model.id() + " has no likelihood");
    }
    const MarginalTable table = model.marginals(data.targets, data.conditions);
    MatrixXd out(model.dim(), data.size());
    for (int j = 0; j < model.dim(); ++j) {
        for (int c = 0; c < data.size(); ++c) {
            out(j, c) = one_dim_log_density(table[j][c], data.targets(j, c));
        }
    }
    return out;
}

double avg_log_likelihood(const DensityModel& model, const Trace& trace)
{
    return log_likelihood_terms(model, checked_transitions(trace)).mean();
}

LrResult lr_score(const MatrixXd& model_terms, const MatrixXd& baseline_terms, const LrOptions& options)
{
    if (model_terms.rows() != baseline_terms.rows() || model_terms.cols() != baseline_terms.cols()) {
        throw std::invalid_argument("lr_score: term matrices differ in shape");
    }
    if (!(options.p_min >= 0.0)) {
        throw std::invalid_argument("lr_score: p_min must be >= 0");
    }
    const double log_p_min = std::log(options.p_min);
    const Eigen::Index d = model_terms.rows();
    LrResult r;
    r.total = static_cast<int>(model_terms.cols());
    VectorXd sum_m = VectorXd::Zero(d);
    VectorXd sum_b = VectorXd::Zero(d);
    for (Eigen::Index c = 0; c < model_terms.cols(); ++c) {
        const auto col = model_terms.col(c);
        const bool keep = options.per_dimension ? (col.array() > log_p_min).all() : col.sum() > log_p_min;
        if (keep) {
            sum_m += col;
            sum_b += baseline_terms.col(c);
            ++r.kept;
        }
    }
    r.or_rate = r.total > 0 ? static_cast<double>(r.total - r.kept) / r.total : 1.0;
    if (r.kept == 0) {
        r.per_dimension = VectorXd::Constant(d, kNaN);
        return r;
    }
    const double n = static_cast<double>(r.kept);
    r.lr = std::exp((sum_m.sum() - sum_b.sum()) / (n * static_cast<double>(d)));
    r.per_dimension = ((sum_m - sum_b) / n).array().exp();
    return r;
}

LrResult lr_score(const DensityModel& model, const Trace& trace, const DensityModel& baseline,
                  const LrOptions& options)
{
    const TransitionSet data = checked_transitions(trace);
    return lr_score(log_likelihood_terms(model, data), log_likelihood_terms(baseline, data), options);
}

DimensionScore r2_score(const MatrixXd& predictions, const MatrixXd& targets, const VectorXd& variances)
{
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols() || targets.cols() == 0) {
        throw std::invalid_argument("r2_score: shape mismatch or empty");
    }
    const VectorXd mse = (predictions - targets).rowwise().squaredNorm() / static_cast<double>(targets.cols());
    VectorXd per(targets.rows());
    std::vector<int> excluded;
    for (Eigen::Index j = 0; j < per.size(); ++j) {
        if (!(variances(j) > 0.0)) {
            excluded.push_back(static_cast<int>(j));
            per(j) = kNaN;
        } else {
            per(j) = 1.0 - mse(j) / variances(j);
        }
    }
    return average_rows(per, std::move(excluded));
}

DimensionScore r2_score(const MatrixXd& predictions, const MatrixXd& targets)
{
    return r2_score(predictions, targets, population_variance(targets));
}

DimensionScore r2_score(const DensityModel& model, const Trace& trace)
{
    const TransitionSet data = checked_transitions(trace);
    return r2_score(model.mean_batch(data.conditions), data.targets);
}

double ks_statistic(std::vector<double> q)
{
    if (q.empty()) {
        throw std::invalid_argument("ks_statistic: no quantiles");
    }
    std::sort(q.begin(), q.end());
    const double n = static_cast<double>(q.size());
    double worst = 0.0;
    for (std::size_t s = 0; s < q.size(); ++s) {
        worst = std::max(worst, std::abs(q[s] - static_cast<double>(s + 1) / n));
    }
    return std::min(worst, 1.0);
}

MatrixXd cdf_terms(const DensityModel& model, const TransitionSet& data)
{
    if (!model.capabilities().has_cdf) {
        throw CapabilityError(model.id() + " has no CDF");
    }
    const MarginalTable table = model.marginals(data.targets, data.conditions);
    MatrixXd out(model.dim(), data.size());
    for (int j = 0; j < model.dim(); ++j) {
        for (int c = 0; c < data.size(); ++c) {
            out(j, c) = mixture_cdf(table[j][c], data.targets(j, c));
        }
    }
    return out;
}

DimensionScore ks_score(const DensityModel& model, const Trace& trace)
{
    const MatrixXd q = cdf_terms(model, checked_transitions(trace));
    VectorXd per(q.rows());
    for (Eigen::Index j = 0; j < q.rows(); ++j) {
        per(j) = ks_statistic(std::vector<double>(q.row(j).begin(), q.row(j).end()));
    }
    return average_rows(per, {});
}

std::vector<int> valid_positions(const Trace& trace, int horizon)
{
    if (horizon < 1) {
        throw std::invalid_argument("valid_positions: horizon must be >= 1");
    }
    std::vector<int> out;
    for (const auto& [b, e] : trace.episode_ranges()) {
        for (int t = b; t + horizon < e; ++t) {
            out.push_back(t);
        }
    }
    return out;
}

std::vector<MatrixXd> simulate_endpoints(const DensityModel& model, const Trace& trace, const std::vector<int>& starts,
                                         int horizon, int samples, Rng& rng)
{
    const int n = static_cast<int>(starts.size()) * samples;
    MatrixXd cond(kConditionDim, n);
    for (std::size_t p = 0; p < starts.size(); ++p) {
        cond.middleCols(static_cast<Eigen::Index>(p) * samples, samples) =
            condition_at(trace, starts[p]).replicate(1, samples);
    }
    const std::vector<int> members = draw_members(model, n, rng);
    MatrixXd y;
    for (int h = 0; h < horizon; ++h) {
        y = model.sample_batch(cond, members, rng);
        if (h + 1 == horizon) {
            break;
        }
        for (int c = 0; c < n; ++c) {
            const int row = starts[c / samples] + h + 1;
            try {
                cond.col(c) = make_condition(featurize(y.col(c), model.variant()), trace.action(row));
            } catch (const std::domain_error&) {
                cond.col(c).setConstant(kNaN);
            }
        }
    }
    std::vector<MatrixXd> out(starts.size());
    for (std::size_t p = 0; p < starts.size(); ++p) {
        out[p] = y.middleCols(static_cast<Eigen::Index>(p) * samples, samples);
    }
    return out;
}

LongHorizonResult long_horizon(const DensityModel& model, const Trace& trace, const LongHorizonConfig& config,
                               Rng& rng)
{
    if (config.samples < 1 || config.positions < 1) {
        throw std::invalid_argument("long_horizon: samples and positions must be >= 1");
    }
    const std::vector<int> valid = valid_positions(trace, config.horizon);
    if (valid.empty()) {
        throw std::invalid_argument("long_horizon: no episode is longer than the horizon");
    }
    LongHorizonResult result;
    const std::vector<int> perm = shuffled_indices(static_cast<int>(valid.size()), rng);
    const int count = std::min<int>(config.positions, static_cast<int>(valid.size()));
    for (int i = 0; i < count; ++i) {
        result.positions.push_back(valid[perm[i]]);
    }
    std::sort(result.positions.begin(), result.positions.end());

    const bool det = model.capabilities().is_deterministic;
    const int samples = det ? 1 : config.samples;
    const auto endpoints = simulate_endpoints(model, trace, result.positions, config.horizon, samples, rng);

    const int d = model.dim();
    MatrixXd mc_mean(d, count);
    MatrixXd truth(d, count);
    MatrixXd quantile(d, count);
    for (int p = 0; p < count; ++p) {
        truth.col(p) = trace.observation(result.positions[p] + config.horizon);
        mc_mean.col(p) = endpoints[p].rowwise().mean();
        for (int j = 0; j < d; ++j) {
            quantile(j, p) = static_cast<double>((endpoints[p].row(j).array() < truth(j, p)).count()) / samples;
        }
    }
    result.r2 = r2_score(mc_mean, truth, population_variance(checked_transitions(trace).targets));
    if (!det) {
        VectorXd per(d);
        for (int j = 0; j < d; ++j) {
            per(j) = ks_statistic(std::vector<double>(quantile.row(j).begin(), quantile.row(j).end()));
        }
        result.ks = average_rows(per, {});
    }
    return result;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const MetricReport& r)
{
    j = json{{"model", r.model},
             {"dataset", r.dataset},
             {"fold", r.fold},
             {"folds", r.folds},
             {"horizon", r.horizon},
             {"lr", metric_json(r.lr)},
             {"or", metric_json(r.or_rate)},
             {"r2", metric_json(r.r2)},
             {"ks", metric_json(r.ks)},
             {"r2_L", metric_json(r.r2_L)},
             {"ks_L", metric_json(r.ks_L)},
             {"flagged_dimensions", r.flagged_dimensions},
             {"train_seconds", r.train_seconds},
             {"test_seconds", r.test_seconds}};
}

void from_json(const json& j, MetricReport& r)
{
    r.model = j.at("model").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.fold = j.at("fold").get<int>();
    r.folds = j.at("folds").get<int>();
    r.horizon = j.at("horizon").get<int>();
    r.lr = metric_from_json(j.at("lr"));
    r.or_rate = metric_from_json(j.at("or"));
    r.r2 = metric_from_json(j.at("r2"));
    r.ks = metric_from_json(j.at("ks"));
    r.r2_L = metric_from_json(j.at("r2_L"));
    r.ks_L = metric_from_json(j.at("ks_L"));
    r.flagged_dimensions = j.at("flagged_dimensions").get<std::vector<int>>();
    r.train_seconds = j.at("train_seconds").get<double>();
    r.test_seconds = j.at("test_seconds").get<double>();
}

std::string metric_csv_header()
{
    return "model,dataset,fold,folds,lr,lr_ci90,or,or_ci90,r2,r2_ci90,ks,ks_ci90,r2_L,r2_L_ci90,ks_L,ks_L_ci90,"
           "horizon,train_seconds,test_seconds";
}

std::string metric_csv_row(const MetricReport& r)
{
    std::string row = fmt::format("{},{},{},{}", r.model, r.dataset, r.fold, r.folds);
    for (const Metric* m : {&r.lr, &r.or_rate, &r.r2, &r.ks, &r.r2_L, &r.ks_L}) {
        row += fmt::format(",{},{}", cell(m->value), m->value ? fmt::format("{:.17g}", m->ci90) : std::string());
    }
    row += fmt::format(",{},{:.6f},{:.6f}", r.horizon, r.train_seconds, r.test_seconds);
    return row;
}

Metric aggregate(const std::vector<Metric>& folds)
{
    Metric out;
    std::vector<double> values;
    for (const auto& f : folds) {
        if (f.value && std::isfinite(*f.value)) {
            values.push_back(*f.value);
        }
    }
    if (values.empty()) {
        return out;
    }
    const double k = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    out.value = mean;
    out.ci90 = values.size() > 1 ? 1.645 * std::sqrt(ss / (k - 1.0)) / std::sqrt(k) : 0.0;
    std::size_t dims = 0;
    for (const auto& f : folds) {
        dims = std::max(dims, f.per_dimension.size());
    }
    out.per_dimension.assign(dims, 0.0);
    for (std::size_t j = 0; j < dims; ++j) {
        double acc = 0.0;
        int used = 0;
        for (const auto& f : folds) {
            if (j < f.per_dimension.size() && std::isfinite(f.per_dimension[j])) {
                acc += f.per_dimension[j];
                ++used;
            }
        }
        out.per_dimension[j] = used > 0 ? acc / used : kNaN;
    }
    return out;
}

MetricReport evaluate(const DensityModel& model, const DensityModel& baseline, const Trace& test,
                      const EvaluationConfig& config)
{
    MetricReport r;
    r.model = model.id();
    r.horizon = config.long_horizon.horizon;
    const TransitionSet data = checked_transitions(test);
    const Capabilities caps = model.capabilities();

    const DimensionScore r2 = r2_score(model.mean_batch(data.conditions), data.targets);
    r.r2 = single(r2.value, r2.per_dimension);
    r.flagged_dimensions = r2.excluded;
    if (caps.has_likelihood) {
        const LrResult lr = lr_score(log_likelihood_terms(model, data), log_likelihood_terms(baseline, data),
                                     config.lr);
        r.lr = single(lr.lr, lr.per_dimension);
        r.or_rate = single(lr.or_rate);
    }
    if (caps.has_cdf) {
        const DimensionScore ks = ks_score(model, test);
        r.ks = single(ks.value, ks.per_dimension);
    }
    if (config.compute_long_horizon) {
        Rng rng = make_rng(config.seed, {0x6c6f6e67u});
        const LongHorizonResult lh = long_horizon(model, test, config.long_horizon, rng);
        r.r2_L = single(lh.r2.value, lh.r2.per_dimension);
        if (lh.ks) {
            r.ks_L = single(lh.ks->value, lh.ks->per_dimension);
        }
    }
    return r;
}

std::vector<int> training_episodes(int num_episodes, int folds, int fold)
{
    if (folds < 2 || num_episodes < folds) {
        throw std::invalid_argument(
            fmt::format("cross validation needs at least as many episodes as folds ({} < {})", num_episodes, folds));
    }
    if (fold < 0 || fold >= folds) {
        throw std::invalid_argument("training_episodes: fold out of range");
    }
    std::vector<int> out;
    for (int e = 0; e < num_episodes; ++e) {
        const int group = static_cast<int>(static_cast<long long>(e) * folds / num_episodes);
        if (group != fold) {
            out.push_back(e);
        }
    }
    return out;
}

CvResult cross_validate(const ModelFactory& factory, const Trace& pool, const Trace& test, const CvConfig& config)
{
    const int k = config.folds;
    const int episodes = pool.num_episodes();
    training_episodes(episodes, k, 0);  // validates the split
    CvResult result;
    result.folds.resize(k);
    parallel_for(k, [&](int fold) {
        using clock = std::chrono::steady_clock;
        const Trace train = pool.select_episodes(training_episodes(episodes, k, fold));
        const TransitionSet data = transitions(train);
        auto model = factory(fold);
        BaselineGaussian baseline(model->variant());
        const auto t0 = clock::now();
        model->fit(data);
        const auto t1 = clock::now();
        baseline.fit(data);
        EvaluationConfig ec = config.evaluation;
        ec.seed = derive_seed(config.evaluation.seed, {static_cast<std::uint64_t>(fold)});
        MetricReport r = evaluate(*model, baseline, test, ec);
        const auto t2 = clock::now();
        r.dataset = config.dataset;
        r.fold = fold;
        r.folds = k;
        r.train_seconds = std::chrono::duration<double>(t1 - t0).count();
        r.test_seconds = std::chrono::duration<double>(t2 - t1).count();
        result.folds[fold] = std::move(r);
    });

    MetricReport& agg = result.aggregate;
    agg.model = result.folds.front().model;
    agg.dataset = config.dataset;
    agg.fold = -1;
    agg.folds = k;
    agg.horizon = config.evaluation.long_horizon.horizon;
    auto collect = [&](Metric MetricReport::*field) {
        std::vector<Metric> ms;
        for (const auto& f : result.folds) {
            ms.push_back(f.*field);
        }
        return aggregate(ms);
    };
    agg.lr = collect(&MetricReport::lr);
    agg.or_rate = collect(&MetricReport::or_rate);
    agg.r2 = collect(&MetricReport::r2);
    agg.ks = collect(&MetricReport::ks);
    agg.r2_L = collect(&MetricReport::r2_L);
    agg.ks_L = collect(&MetricReport::ks_L);
    for (const auto& f : result.folds) {
        agg.train_seconds += f.train_seconds / k;
        agg.test_seconds += f.test_seconds / k;
        for (int d : f.flagged_dimensions) {
            if (std::find(agg.flagged_dimensions.begin(), agg.flagged_dimensions.end(), d)
                == agg.flagged_dimensions.end()) {
                agg.flagged_dimensions.push_back(d);
            }
        }
    }
    return result;
}

}  // namespace acrobench
