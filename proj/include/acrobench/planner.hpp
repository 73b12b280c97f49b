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

#ifndef ACROBENCH_PLANNER_HPP
#define ACROBENCH_PLANNER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "acrobench/acrobot.hpp"
#include "acrobench/models.hpp"
#include "acrobench/rng.hpp"

namespace acrobench {

struct CemConfig {
    int total_samples = 500;  // over all iterations
    int elite = 50;
    int iterations = 5;
    double smoothing = 0.1;

    int population() const noexcept { return total_samples / iterations; }
};

struct PlannerConfig {
    int horizon = 10;
    int population = 100;
    int particles = 5;  // 1 is used for deterministic models
    std::optional<CemConfig> cem;
    std::vector<Action> actions{Action::Negative, Action::Zero, Action::Positive};

    void validate() const;
};

void to_json(nlohmann::json& j, const PlannerConfig& c);
void from_json(const nlohmann::json& j, PlannerConfig& c);

using ActionSequence = std::vector<Action>;

/// Mean over particles of the simulated L-step return of each sequence, in one batch.
/// A particle that produces a non-finite observable makes its sequence's return -inf.
std::vector<double> rollout_returns(const DensityModel& model, const FeatureVector& s0,
                                    const std::vector<ActionSequence>& sequences, int particles, Rng& rng);

double rollout_return(const DensityModel& model, const FeatureVector& s0, const ActionSequence& seq, int particles,
                      Rng& rng);

/// Number of rollouts rejected for non-finite observables since process start.
std::uint64_t rejected_rollouts() noexcept;

/// Index of the largest value; the lowest index wins ties and -inf everywhere gives 0.
int argmax_first(const std::vector<double>& values);

int effective_particles(const DensityModel& model, const PlannerConfig& config) noexcept;

Action random_shooting(const DensityModel& model, const FeatureVector& s0, const PlannerConfig& config, Rng& rng);

/// Per-step categorical distributions over config.actions: horizon x |actions|.
using CemDistribution = Eigen::MatrixXd;

/// (1 - alpha) * dist + alpha * elite frequencies.
CemDistribution cem_update(const CemDistribution& dist, const std::vector<ActionSequence>& elite,
                           const std::vector<Action>& actions, double alpha);

Action cem(const DensityModel& model, const FeatureVector& s0, const PlannerConfig& config, Rng& rng);

/// CEM when config.cem is set, random shooting otherwise.
Action plan(const DensityModel& model, const FeatureVector& s0, const PlannerConfig& config, Rng& rng);

}  // namespace acrobench

#endif  // ACROBENCH_PLANNER_HPP
