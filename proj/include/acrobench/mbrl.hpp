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

#ifndef ACROBENCH_MBRL_HPP
#define ACROBENCH_MBRL_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acrobench/metrics.hpp"
#include "acrobench/models.hpp"
#include "acrobench/planner.hpp"
#include "acrobench/trace.hpp"

namespace acrobench {

/// Reference asymptotic rewards of the optimal (oracle RS) and random policies.
inline constexpr double kMarOpt = 2.104;
inline constexpr double kMarRan = 0.12;

struct LearningCurve {
    std::string model;
    Variant variant = Variant::RawAngles;
    std::uint64_t seed = 0;
    int epoch_length = 200;
    std::vector<double> mean_rewards;  // MR(1..N)

    int size() const noexcept { return static_cast<int>(mean_rewards.size()); }
};

struct MbrlConfig {
    int epochs = 100;
    int epoch_length = 200;
    PlannerConfig planner;
    std::uint64_t seed = 0;
    /// When non-empty, epoch traces and the curve are written here after every epoch and a
    /// rerun resumes from the epochs already on disk.
    std::string out_dir;
};

void to_json(nlohmann::json& j, const MbrlConfig& c);
void from_json(const nlohmann::json& j, MbrlConfig& c);

struct MbrlResult {
    LearningCurve curve;
    std::vector<Trace> epochs;
    bool aborted = false;
    std::string diagnostic;
    int resumed_epochs = 0;
};

/// Fixed start state of every epoch of the run with this seed.
AcrobotState start_state(std::uint64_t seed);

/// One T-step episode from `start`; row t holds y_t, a_t and reward(y_{t+1}).
/// `policy` is called with the current observation.
Trace run_episode(const AcrobotState& start, Variant variant, int length, int episode,
                  const std::function<Action(const Observation&)>& policy);

Trace random_episode(const AcrobotState& start, Variant variant, int length, int episode, Rng& rng);

/// Model-predictive control episode on the true system.
Trace planned_episode(const DensityModel& model, const AcrobotState& start, int length, int episode,
                      const PlannerConfig& planner, Rng& rng);

/// Factory receives the epoch index (2..N) of the fit.
MbrlResult run_mbrl(const ModelFactory& factory, Variant variant, const MbrlConfig& config);

double mar(const LearningCurve& curve);
double rmar(double mar_value, double mar_opt = kMarOpt, double mar_ran = kMarRan);

/// Centered 5-epoch running mean; NaN where the window is incomplete.
std::vector<double> centered_running_mean(const std::vector<double>& values, int half_width = 2);

/// T * first epoch whose centered 5-epoch mean exceeds mar_ran + p% of the gap; empty if never.
std::optional<long> mrcp(const LearningCurve& curve, double p = 70.0, double mar_opt = kMarOpt,
                         double mar_ran = kMarRan);

struct DynamicReport {
    std::string model;
    std::uint64_t seed = 0;
    double mar = 0.0;
    double rmar = 0.0;
    std::optional<long> mrcp70;
    double mar_opt = kMarOpt;
    double mar_ran = kMarRan;
};

DynamicReport dynamic_report(const LearningCurve& curve, double mar_opt = kMarOpt, double mar_ran = kMarRan);

void to_json(nlohmann::json& j, const DynamicReport& r);

/// seed,epoch,steps_so_far,mean_reward
std::string curve_csv(const LearningCurve& curve, bool header = true);

}  // namespace acrobench

#endif  // ACROBENCH_MBRL_HPP
