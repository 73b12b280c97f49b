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

#ifndef ACROBENCH_EXPERIMENTS_HPP
#define ACROBENCH_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "acrobench/mbrl.hpp"
#include "acrobench/metrics.hpp"
#include "acrobench/models.hpp"
#include "acrobench/planner.hpp"
#include "acrobench/trace.hpp"

namespace acrobench {

/// `episodes` random-policy episodes, each from its own reset state.
Trace gen_random_data(Variant variant, int episodes, int episode_length, std::uint64_t seed);

struct LinearPolicyConfig {
    int random_steps = 200;  // data of the single random epoch the linear model is fitted on
    PlannerConfig planner;
};

/// Fits ARLin_sigma on one random epoch, then rolls the resulting RS policy out from reset states.
Trace gen_linear_policy_data(Variant variant, int episodes, int episode_length, std::uint64_t seed,
                             const LinearPolicyConfig& config = {});

/// Model id plus optional hyperparameter overrides, e.g. {"id": "DARMDN(10)", "epochs": 50}.
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Factory that sets the training seed from (seed, tag).
ModelFactory seeded_factory(const ModelConfig& config, Variant variant, std::uint64_t seed);

struct StaticConfig {
    Variant variant = Variant::RawAngles;
    std::vector<nlohmann::json> models;
    std::string train_path;
    std::string test_path;
    std::string dataset;  // label in the report
    int folds = 10;
    EvaluationConfig evaluation;
    std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const StaticConfig& c);
void from_json(const nlohmann::json& j, StaticConfig& c);

/// Cross-validates every model; writes static_report.json and static_report.csv when out_dir is set.
std::vector<CvResult> run_static(const StaticConfig& config, const std::string& out_dir = {});

struct DynamicConfig {
    Variant variant = Variant::RawAngles;
    std::vector<nlohmann::json> models;
    std::vector<std::uint64_t> seeds{0};
    int epochs = 100;
    int epoch_length = 200;
    PlannerConfig planner;
    double mar_opt = kMarOpt;
    double mar_ran = kMarRan;
};

void to_json(nlohmann::json& j, const DynamicConfig& c);
void from_json(const nlohmann::json& j, DynamicConfig& c);

struct DynamicSummary {
    std::string model;
    std::vector<DynamicReport> runs;
    double rmar_mean = 0.0;
    double rmar_ci90 = 0.0;
    std::optional<double> mrcp70_mean;  // over runs that reached the threshold
    int mrcp70_reached = 0;
    std::vector<LearningCurve> curves;
    std::vector<std::string> diagnostics;
};

void to_json(nlohmann::json& j, const DynamicSummary& s);

/// run_mbrl for every (model, seed); per-run directories under out_dir make the runs resumable.
std::vector<DynamicSummary> run_dynamic(const DynamicConfig& config, const std::string& out_dir = {});

struct PlannerCell {
    std::string label;
    PlannerConfig planner;
};

struct PlannerComparisonConfig {
    Variant variant = Variant::RawAngles;
    std::vector<PlannerCell> cells;
    int rollouts = 50;
    int episode_length = 200;
    std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const PlannerComparisonConfig& c);
void from_json(const nlohmann::json& j, PlannerComparisonConfig& c);

/// RS n in {10, 100, 1000} and CEM n = 500 on the true dynamics.
PlannerComparisonConfig default_planner_comparison();

struct PlannerRow {
    std::string label;
    double mean = 0.0;
    double ci90 = 0.0;
    std::vector<double> episode_rewards;
};

/// Mean episode reward of each planner on the oracle model from independent reset states.
std::vector<PlannerRow> compare_planners(const PlannerComparisonConfig& config);

/// Mean and 1.645 sd / sqrt(n).
std::pair<double, double> mean_ci90(const std::vector<double>& values);

struct Futures {
    Eigen::MatrixXd truth;                 // d_y x (L+1), ground truth from the start row
    std::vector<Eigen::MatrixXd> samples;  // n paths, d_y x (L+1)
};

/// n simulated paths of length L from `start_row`, replaying the ground-truth actions.
Futures simulate_futures(const DensityModel& model, const Trace& trace, int start_row, int n, int horizon, Rng& rng);

/// kind,path,step,y1..y{d}
std::string futures_csv(const Futures& f);

/// dim,bin_low,bin_high,count over the endpoints.
std::string endpoint_histogram_csv(const Futures& f, int bins = 40);

struct Calibration {
    double mar_opt = 0.0;
    double mar_opt_ci90 = 0.0;
    double mar_ran = 0.0;
    double mar_ran_ci90 = 0.0;
    int rollouts = 0;
};

/// MAR_opt: oracle RS episodes; MAR_ran: random-policy episodes; both from independent reset states.
Calibration calibrate(Variant variant, const PlannerConfig& planner, int rollouts, int episode_length,
                      std::uint64_t seed);

void to_json(nlohmann::json& j, const Calibration& c);

}  // namespace acrobench

#endif  // ACROBENCH_EXPERIMENTS_HPP
