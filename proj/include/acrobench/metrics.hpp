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

#ifndef ACROBENCH_METRICS_HPP
#define ACROBENCH_METRICS_HPP

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "acrobench/models.hpp"
#include "acrobench/trace.hpp"

namespace acrobench {

/// Density threshold of the outlier filter.
inline constexpr double kDefaultPMin = 1.47e-6;

/// Per-dimension score averaged over the dimensions that are defined.
struct DimensionScore {
    double value = 0.0;
    Eigen::VectorXd per_dimension;  // NaN where excluded
    std::vector<int> excluded;      // e.g. zero target variance
};

/// log p_j(y^j_{t+1} | x^j_t) for every within-episode step: d_y x (pairs).
Eigen::MatrixXd log_likelihood_terms(const DensityModel& model, const TransitionSet& data);

/// (1/(T-1)) sum_t (1/d_y) sum_j log p_j(y^j_{t+1} | x^j_t).
double avg_log_likelihood(const DensityModel& model, const Trace& trace);

struct LrOptions {
    double p_min = kDefaultPMin;
    /// Drop a step when any one-dimensional density is <= p_min instead of the joint density.
    bool per_dimension = false;
};

struct LrResult {
    std::optional<double> lr;  // undefined when every step is filtered
    double or_rate = 0.0;
    Eigen::VectorXd per_dimension;  // exp(L_j - L_b,j) on the kept steps
    int kept = 0;
    int total = 0;
};

LrResult lr_score(const DensityModel& model, const Trace& trace, const DensityModel& baseline,
                  const LrOptions& options = {});
LrResult lr_score(const Eigen::MatrixXd& model_terms, const Eigen::MatrixXd& baseline_terms,
                  const LrOptions& options = {});

/// 1 - MSE_j / var_j averaged over dimensions; var_j is the population variance of the targets.
DimensionScore r2_score(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);
DimensionScore r2_score(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets,
                        const Eigen::VectorXd& variances);
DimensionScore r2_score(const DensityModel& model, const Trace& trace);

/// max_s |q_(s) - s/n| over the sorted quantiles, s = 1..n.
double ks_statistic(std::vector<double> quantiles);

/// F_j(y^j_{t+1} | x^j_t) for every step: d_y x (pairs).
Eigen::MatrixXd cdf_terms(const DensityModel& model, const TransitionSet& data);

DimensionScore ks_score(const DensityModel& model, const Trace& trace);

struct LongHorizonConfig {
    int horizon = 10;
    int samples = 100;
    int positions = 100;
};

struct LongHorizonResult {
    DimensionScore r2;
    std::optional<DimensionScore> ks;  // empty for deterministic models
    std::vector<int> positions;        // start rows
};

/// Start rows t with t + horizon inside the same episode.
std::vector<int> valid_positions(const Trace& trace, int horizon);

/// Simulates `samples` futures of length `horizon` from each start row, replaying the
/// ground-truth actions: (d_y x samples) endpoint blocks, one per start row.
std::vector<Eigen::MatrixXd> simulate_endpoints(const DensityModel& model, const Trace& trace,
                                                const std::vector<int>& starts, int horizon, int samples, Rng& rng);

LongHorizonResult long_horizon(const DensityModel& model, const Trace& trace, const LongHorizonConfig& config,
                               Rng& rng);

/// One metric: a single value, or the fold mean with its 90% Gaussian half-width.
struct Metric {
    std::optional<double> value;
    double ci90 = 0.0;
    std::vector<double> per_dimension;
};

struct MetricReport {
    std::string model;
    std::string dataset;
    int fold = -1;  // -1: aggregate over folds
    int folds = 1;
    Metric lr, or_rate, r2, ks, r2_L, ks_L;
    int horizon = 10;
    std::vector<int> flagged_dimensions;
    double train_seconds = 0.0;
    double test_seconds = 0.0;
};

void to_json(nlohmann::json& j, const MetricReport& r);
void from_json(const nlohmann::json& j, MetricReport& r);

/// Flat CSV for plotting; empty cells mark metrics the model cannot produce.
std::string metric_csv_header();
std::string metric_csv_row(const MetricReport& r);

/// mean and 1.645 sd / sqrt(k) over the defined fold values.
Metric aggregate(const std::vector<Metric>& folds);

struct EvaluationConfig {
    LrOptions lr;
    LongHorizonConfig long_horizon;
    bool compute_long_horizon = true;
    std::uint64_t seed = 0;
};

/// All six metrics of a fitted model on a test trace; the baseline is fitted by the caller.
MetricReport evaluate(const DensityModel& model, const DensityModel& baseline, const Trace& test,
                      const EvaluationConfig& config);

/// Unfitted model for a fold; the fold index lets the factory derive seeds.
using ModelFactory = std::function<std::unique_ptr<DensityModel>(int fold)>;

struct CvConfig {
    int folds = 10;
    EvaluationConfig evaluation;
    std::string dataset;
};

struct CvResult {
    std::vector<MetricReport> folds;
    MetricReport aggregate;
};

/// Episodes of `pool` are split into k contiguous groups; fold i trains on every group but i
/// and every fold is evaluated on `test`.
CvResult cross_validate(const ModelFactory& factory, const Trace& pool, const Trace& test, const CvConfig& config);

/// Episode positions of the training split of fold `fold` out of `folds`.
std::vector<int> training_episodes(int num_episodes, int folds, int fold);

}  // namespace acrobench

#endif  // ACROBENCH_METRICS_HPP
