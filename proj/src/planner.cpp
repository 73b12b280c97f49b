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

#include "acrobench/planner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace acrobench {

using Eigen::MatrixXd;
using json = nlohmann::json;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::atomic<std::uint64_t> g_rejected{0};

int action_slot(const std::vector<Action>& actions, Action a)
{
    const auto it = std::find(actions.begin(), actions.end(), a);
    if (it == actions.end()) {
        throw std::invalid_argument("action outside the planner's action set");
    }
    return static_cast<int>(it - actions.begin());
}

ActionSequence sample_sequence(const CemDistribution& dist, const std::vector<Action>& actions, Rng& rng)
{
    ActionSequence seq(dist.rows());
    for (Eigen::Index h = 0; h < dist.rows(); ++h) {
        const double u = uniform01(rng);
        double cum = 0.0;
        int pick = static_cast<int>(actions.size()) - 1;
        for (int k = 0; k < static_cast<int>(actions.size()); ++k) {
            cum += dist(h, k);
            if (u < cum) {
                pick = k;
                break;
            }
        }
        seq[h] = actions[pick];
    }
    return seq;
}

}  // namespace

void PlannerConfig::validate() const
{
    if (horizon < 1 || population < 1 || particles < 1) {
        throw std::invalid_argument("planner: horizon, population and particles must be >= 1");
    }
    if (actions.empty()) {
        throw std::invalid_argument("planner: empty action set");
    }
    if (cem) {
        if (cem->iterations < 1 || cem->population() < 1) {
            throw std::invalid_argument("planner: CEM needs at least one sample per iteration");
        }
        if (cem->elite < 1 || cem->elite > cem->population()) {
            throw std::invalid_argument("planner: CEM elite must be in [1, per-iteration population]");
        }
        if (!(cem->smoothing > 0.0 && cem->smoothing <= 1.0)) {
            throw std::invalid_argument("planner: CEM smoothing must be in (0, 1]");
        }
    }
}

void to_json(json& j, const PlannerConfig& c)
{
    std::vector<int> acts;
    for (Action a : c.actions) {
        acts.push_back(static_cast<int>(a));
    }
    j = json{{"horizon", c.horizon}, {"population", c.population}, {"particles", c.particles}, {"actions", acts}};
    if (c.cem) {
        j["cem"] = {{"total_samples", c.cem->total_samples},
                    {"elite", c.cem->elite},
                    {"iterations", c.cem->iterations},
                    {"smoothing", c.cem->smoothing}};
    }
}

void from_json(const json& j, PlannerConfig& c)
{
    c = PlannerConfig{};
    c.horizon = j.value("horizon", c.horizon);
    c.population = j.value("population", c.population);
    c.particles = j.value("particles", c.particles);
    if (j.contains("actions")) {
        c.actions.clear();
        for (int a : j.at("actions").get<std::vector<int>>()) {
            c.actions.push_back(action_from_int(a));
        }
    }
    if (j.contains("cem") && !j.at("cem").is_null()) {
        const auto& k = j.at("cem");
        CemConfig cc;
        cc.total_samples = k.value("total_samples", cc.total_samples);
        cc.elite = k.value("elite", cc.elite);
        cc.iterations = k.value("iterations", cc.iterations);
        cc.smoothing = k.value("smoothing", cc.smoothing);
        c.cem = cc;
    }
}

std::vector<double> rollout_returns(const DensityModel& model, const FeatureVector& s0,
                                    const std::vector<ActionSequence>& sequences, int particles, Rng& rng)
{
    const int m = static_cast<int>(sequences.size());
    if (m == 0) {
        return {};
    }
    const int horizon = static_cast<int>(sequences.front().size());
    const int n = m * particles;
    MatrixXd cond(kConditionDim, n);
    for (int c = 0; c < n; ++c) {
        cond.col(c) = make_condition(s0, sequences[c / particles][0]);
    }
    const std::vector<int> members = draw_members(model, n, rng);
    Eigen::VectorXd ret = Eigen::VectorXd::Zero(n);
    for (int h = 0; h < horizon; ++h) {
        const MatrixXd y = model.sample_batch(cond, members, rng);
        for (int c = 0; c < n; ++c) {
            if (!std::isfinite(ret(c))) {
                continue;
            }
            const auto yc = y.col(c);
            if (!yc.allFinite()) {
                ret(c) = kNegInf;
                continue;
            }
            ret(c) += reward(yc, model.variant());
            if (h + 1 < horizon) {
                try {
                    cond.col(c) = make_condition(featurize(yc, model.variant()), sequences[c / particles][h + 1]);
                } catch (const std::domain_error&) {
                    ret(c) = kNegInf;
                }
            }
        }
    }
    std::vector<double> out(m, 0.0);
    for (int c = 0; c < n; ++c) {
        out[c / particles] += ret(c) / particles;
    }
    for (double& v : out) {
        if (std::isnan(v) || v == kNegInf) {
            v = kNegInf;
            ++g_rejected;
        }
    }
    return out;
}

double rollout_return(const DensityModel& model, const FeatureVector& s0, const ActionSequence& seq, int particles,
                      Rng& rng)
{
    if (seq.empty() || particles < 1) {
        throw std::invalid_argument("rollout_return: empty sequence or no particles");
    }
    return rollout_returns(model, s0, {seq}, particles, rng).front();
}

std::uint64_t rejected_rollouts() noexcept { return g_rejected.load(); }

int argmax_first(const std::vector<double>& values)
{
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

int effective_particles(const DensityModel& model, const PlannerConfig& config) noexcept
{
    return model.capabilities().is_deterministic ? 1 : config.particles;
}

Action random_shooting(const DensityModel& model, const FeatureVector& s0, const PlannerConfig& config, Rng& rng)
{
    config.validate();
    const int k = static_cast<int>(config.actions.size());
    std::vector<ActionSequence> seqs(config.population, ActionSequence(config.horizon));
    for (auto& seq : seqs) {
        for (auto& a : seq) {
            a = config.actions[uniform_index(rng, k)];
        }
    }
    const auto returns = rollout_returns(model, s0, seqs, effective_particles(model, config), rng);
    return seqs[argmax_first(returns)].front();
}

CemDistribution cem_update(const CemDistribution& dist, const std::vector<ActionSequence>& elite,
                           const std::vector<Action>& actions, double alpha)
{
    if (elite.empty()) {
        return dist;
    }
    CemDistribution freq = CemDistribution::Zero(dist.rows(), dist.cols());
    for (const auto& seq : elite) {
        for (Eigen::Index h = 0; h < dist.rows(); ++h) {
            freq(h, action_slot(actions, seq[h])) += 1.0;
        }
    }
    freq /= static_cast<double>(elite.size());
    return (1.0 - alpha) * dist + alpha * freq;
}

Action cem(const DensityModel& model, const FeatureVector& s0, const PlannerConfig& config, Rng& rng)
{
    config.validate();
    const CemConfig cc = config.cem.value_or(CemConfig{});
    const int k = static_cast<int>(config.actions.size());
    const int pop = cc.population();
    const int particles = effective_particles(model, config);
    CemDistribution dist = CemDistribution::Constant(config.horizon, k, 1.0 / k);
    ActionSequence best;
    double best_return = kNegInf;
    for (int it = 0; it < cc.iterations; ++it) {
        std::vector<ActionSequence> seqs(pop);
        for (auto& s : seqs) {
            s = sample_sequence(dist, config.actions, rng);
        }
        const auto returns = rollout_returns(model, s0, seqs, particles, rng);
        const int top = argmax_first(returns);
        if (best.empty() || returns[top] > best_return) {
            best = seqs[top];
            best_return = returns[top];
        }
        std::vector<int> order(pop);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return returns[a] > returns[b]; });
        std::vector<ActionSequence> elite;
        for (int e = 0; e < cc.elite; ++e) {
            elite.push_back(seqs[order[e]]);
        }
        dist = cem_update(dist, elite, config.actions, cc.smoothing);
    }
    return best.front();
}

Action plan(const DensityModel& model, const FeatureVector& s0, const PlannerConfig& config, Rng& rng)
{
    return config.cem ? cem(model, s0, config, rng) : random_shooting(model, s0, config, rng);
}

}  // namespace acrobench
