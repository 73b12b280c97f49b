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

#include "acrobench/mbrl.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace acrobench {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string epoch_file(const std::string& dir, int epoch)
{
    return (fs::path(dir) / fmt::format("epoch_{:04d}.csv", epoch)).string();
}

void write_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) {
            throw std::runtime_error("cannot write " + tmp);
        }
        os << content;
    }
    fs::rename(tmp, path);
}

json run_record(const std::string& model, Variant variant, const MbrlConfig& config)
{
    // Epoch count is left out so a finished run can be extended in place.
    json cfg = config;
    cfg.erase("out_dir");
    cfg.erase("epochs");
    return {{"model", model}, {"variant", to_string(variant)}, {"config", cfg}};
}

}  // namespace

void to_json(json& j, const MbrlConfig& c)
{
    j = json{{"epochs", c.epochs},
             {"epoch_length", c.epoch_length},
             {"planner", c.planner},
             {"seed", c.seed},
             {"out_dir", c.out_dir}};
}

void from_json(const json& j, MbrlConfig& c)
{
    c = MbrlConfig{};
    c.epochs = j.value("epochs", c.epochs);
    c.epoch_length = j.value("epoch_length", c.epoch_length);
    if (j.contains("planner")) {
        c.planner = j.at("planner").get<PlannerConfig>();
    }
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
}

AcrobotState start_state(std::uint64_t seed)
{
    Rng rng = make_rng(seed, {0x7374617274u});
    return reset(rng);
}

Trace run_episode(const AcrobotState& start, Variant variant, int length, int episode,
                  const std::function<Action(const Observation&)>& policy)
{
    if (length < 1) {
        throw std::invalid_argument("run_episode: length must be >= 1");
    }
    Trace trace(variant);
    AcrobotState s = start;
    Observation y = observe(s, variant);
    for (int t = 0; t < length; ++t) {
        const Action a = policy(y);
        s = step(s, a);
        const Observation next = observe(s, variant);
        trace.append(episode, t, y, a, reward(next, variant));
        y = next;
    }
    return trace;
}

Trace random_episode(const AcrobotState& start, Variant variant, int length, int episode, Rng& rng)
{
    return run_episode(start, variant, length, episode,
                       [&](const Observation&) { return action_from_index(uniform_index(rng, kNumActions)); });
}

Trace planned_episode(const DensityModel& model, const AcrobotState& start, int length, int episode,
                      const PlannerConfig& planner, Rng& rng)
{
    return run_episode(start, model.variant(), length, episode, [&](const Observation& y) {
        return plan(model, featurize(y, model.variant()), planner, rng);
    });
}

MbrlResult run_mbrl(const ModelFactory& factory, Variant variant, const MbrlConfig& config)
{
    if (config.epochs < 1 || config.epoch_length < 2) {
        throw std::invalid_argument("run_mbrl: need at least one epoch of at least two steps");
    }
    config.planner.validate();
    MbrlResult result;
    result.curve.model = factory(1)->id();
    result.curve.variant = variant;
    result.curve.seed = config.seed;
    result.curve.epoch_length = config.epoch_length;
    const AcrobotState start = start_state(config.seed);
    const bool persist = !config.out_dir.empty();
    const json record = run_record(result.curve.model, variant, config);

    if (persist) {
        fs::create_directories(config.out_dir);
        const fs::path run_file = fs::path(config.out_dir) / "run.json";
        if (fs::exists(run_file)) {
            std::ifstream is(run_file);
            if (json::parse(is) != record) {
                throw std::runtime_error(config.out_dir + " holds a different run; refusing to resume");
            }
            for (int e = 1; e <= config.epochs && fs::exists(epoch_file(config.out_dir, e)); ++e) {
                Trace t = read_trace_csv(epoch_file(config.out_dir, e));
                if (t.size() != config.epoch_length || t.variant() != variant) {
                    break;
                }
                result.curve.mean_rewards.push_back(t.mean_reward());
                result.epochs.push_back(std::move(t));
            }
            result.resumed_epochs = static_cast<int>(result.epochs.size());
        } else {
            write_atomic(run_file.string(), record.dump(2) + "\n");
        }
    }

    for (int epoch = result.resumed_epochs + 1; epoch <= config.epochs; ++epoch) {
        Rng rng = make_rng(config.seed, {0x65706f6368u, static_cast<std::uint64_t>(epoch)});
        Trace trace(variant);
        if (epoch == 1) {
            trace = random_episode(start, variant, config.epoch_length, 0, rng);
        } else {
            Trace all(variant);
            for (const auto& t : result.epochs) {
                all.append(t);
            }
            auto model = factory(epoch);
            try {
                model->fit(transitions(all));
            } catch (const std::exception& e) {
                result.aborted = true;
                result.diagnostic = fmt::format("epoch {}: fit failed: {}", epoch, e.what());
                break;
            }
            trace = planned_episode(*model, start, config.epoch_length, epoch - 1, config.planner, rng);
        }
        result.curve.mean_rewards.push_back(trace.mean_reward());
        result.epochs.push_back(std::move(trace));
        if (persist) {
            json meta = record;
            meta["epoch"] = epoch;
            std::ostringstream os;
            write_trace_csv(os, result.epochs.back(), meta.dump());
            write_atomic(epoch_file(config.out_dir, epoch), os.str());
            write_atomic((fs::path(config.out_dir) / "curve.csv").string(), curve_csv(result.curve));
        }
    }
    return result;
}

double mar(const LearningCurve& curve)
{
    const int n = curve.size();
    if (n < 2) {
        throw std::invalid_argument("mar: need at least two epochs");
    }
    double acc = 0.0;
    for (int tau = n / 2; tau <= n; ++tau) {
        acc += curve.mean_rewards[tau - 1];
    }
    return acc / static_cast<double>(n - n / 2 + 1);
}

double rmar(double mar_value, double mar_opt, double mar_ran)
{
    if (!(mar_opt > mar_ran)) {
        throw std::invalid_argument("rmar: mar_opt must exceed mar_ran");
    }
    return (mar_value - mar_ran) / (mar_opt - mar_ran);
}

std::vector<double> centered_running_mean(const std::vector<double>& values, int half_width)
{
    const int n = static_cast<int>(values.size());
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    for (int i = half_width; i + half_width < n; ++i) {
        double acc = 0.0;
        for (int k = i - half_width; k <= i + half_width; ++k) {
            acc += values[k];
        }
        out[i] = acc / (2 * half_width + 1);
    }
    return out;
}

std::optional<long> mrcp(const LearningCurve& curve, double p, double mar_opt, double mar_ran)
{
    const double threshold = mar_ran + p / 100.0 * (mar_opt - mar_ran);
    const auto smooth = centered_running_mean(curve.mean_rewards);
    for (int i = 0; i < static_cast<int>(smooth.size()); ++i) {
        if (std::isfinite(smooth[i]) && smooth[i] > threshold) {
            return static_cast<long>(curve.epoch_length) * (i + 1);
        }
    }
    return std::nullopt;
}

DynamicReport dynamic_report(const LearningCurve& curve, double mar_opt, double mar_ran)
{
    DynamicReport r;
    r.model = curve.model;
    r.seed = curve.seed;
    r.mar = mar(curve);
    r.rmar = rmar(r.mar, mar_opt, mar_ran);
    r.mrcp70 = mrcp(curve, 70.0, mar_opt, mar_ran);
    r.mar_opt = mar_opt;
    r.mar_ran = mar_ran;
    return r;
}

void to_json(json& j, const DynamicReport& r)
{
    j = json{{"model", r.model},
             {"seed", r.seed},
             {"mar", r.mar},
             {"rmar", r.rmar},
             {"mrcp70", r.mrcp70 ? json(*r.mrcp70) : json(nullptr)},
             {"mar_opt", r.mar_opt},
             {"mar_ran", r.mar_ran}};
}

std::string curve_csv(const LearningCurve& curve, bool header)
{
    std::string out = header ? "seed,epoch,steps_so_far,mean_reward\n" : "";
    for (int e = 0; e < curve.size(); ++e) {
        out += fmt::format("{},{},{},{:.17g}\n", curve.seed, e + 1, static_cast<long>(e + 1) * curve.epoch_length,
                           curve.mean_rewards[e]);
    }
    return out;
}

}  // namespace acrobench
