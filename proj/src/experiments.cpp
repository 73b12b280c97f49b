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

#include "acrobench/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "acrobench/parallel.hpp"

namespace acrobench {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using json = nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& content)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    os << content;
}

/// Directory-safe form of a model id: "DARMDN(10)_det" -> "DARMDN_10_det".
std::string path_label(const std::string& id)
{
    std::string s = std::regex_replace(id, std::regex(R"([^A-Za-z0-9_]+)"), "_");
    while (!s.empty() && s.back() == '_') {
        s.pop_back();
    }
    return s;
}

AcrobotState reset_for(std::uint64_t seed, int rollout)
{
    Rng rng = make_rng(seed, {0x7265736574u, static_cast<std::uint64_t>(rollout)});
    return reset(rng);
}

}  // namespace

Trace gen_random_data(Variant variant, int episodes, int episode_length, std::uint64_t seed)
{
    if (episodes < 1) {
        throw std::invalid_argument("gen_random_data: need at least one episode");
    }
    Trace out(variant);
    for (int e = 0; e < episodes; ++e) {
        Rng rng = make_rng(seed, {0x72616e64u, static_cast<std::uint64_t>(e)});
        const AcrobotState s0 = reset(rng);
        out.append(random_episode(s0, variant, episode_length, e, rng));
    }
    return out;
}

Trace gen_linear_policy_data(Variant variant, int episodes, int episode_length, std::uint64_t seed,
                             const LinearPolicyConfig& config)
{
    if (episodes < 1) {
        throw std::invalid_argument("gen_linear_policy_data: need at least one episode");
    }
    Rng rng = make_rng(seed, {0x6c696e31u});
    const Trace random = random_episode(reset(rng), variant, config.random_steps, 0, rng);
    auto model = make_model(ModelConfig::defaults(ModelKind::ARLinSigma), variant);
    model->fit(transitions(random));

    std::vector<Trace> parts(episodes);
    parallel_for(episodes, [&](int e) {
        Rng ep = make_rng(seed, {0x6c696e32u, static_cast<std::uint64_t>(e)});
        const AcrobotState s0 = reset(ep);
        parts[e] = planned_episode(*model, s0, episode_length, e, config.planner, ep);
    });
    Trace out(variant);
    for (const auto& p : parts) {
        out.append(p);
    }
    return out;
}

ModelConfig model_config_from_json(const json& j)
{
    if (j.is_string()) {
        return ModelConfig::parse(j.get<std::string>());
    }
    return j.get<ModelConfig>();
}

ModelFactory seeded_factory(const ModelConfig& config, Variant variant, std::uint64_t seed)
{
    config.validate();
    return [config, variant, seed](int tag) {
        ModelConfig c = config;
        c.train.seed = derive_seed(seed, {static_cast<std::uint64_t>(tag)});
        return make_model(c, variant);
    };
}

// ---------------------------------------------------------------------------

void to_json(json& j, const StaticConfig& c)
{
    j = json{{"variant", to_string(c.variant)},
             {"models", c.models},
             {"train_path", c.train_path},
             {"test_path", c.test_path},
             {"dataset", c.dataset},
             {"folds", c.folds},
             {"p_min", c.evaluation.lr.p_min},
             {"per_dimension_filter", c.evaluation.lr.per_dimension},
             {"horizon", c.evaluation.long_horizon.horizon},
             {"mc_samples", c.evaluation.long_horizon.samples},
             {"positions", c.evaluation.long_horizon.positions},
             {"long_horizon", c.evaluation.compute_long_horizon},
             {"seed", c.seed}};
}

void from_json(const json& j, StaticConfig& c)
{
    c = StaticConfig{};
    c.variant = parse_variant(j.value("variant", std::string("raw")));
    if (j.contains("models")) {
        c.models = j.at("models").get<std::vector<json>>();
    }
    c.train_path = j.value("train_path", c.train_path);
    c.test_path = j.value("test_path", c.test_path);
    c.dataset = j.value("dataset", c.dataset);
    c.folds = j.value("folds", c.folds);
    c.evaluation.lr.p_min = j.value("p_min", c.evaluation.lr.p_min);
    c.evaluation.lr.per_dimension = j.value("per_dimension_filter", c.evaluation.lr.per_dimension);
    c.evaluation.long_horizon.horizon = j.value("horizon", c.evaluation.long_horizon.horizon);
    c.evaluation.long_horizon.samples = j.value("mc_samples", c.evaluation.long_horizon.samples);
    c.evaluation.long_horizon.positions = j.value("positions", c.evaluation.long_horizon.positions);
    c.evaluation.compute_long_horizon = j.value("long_horizon", c.evaluation.compute_long_horizon);
    c.seed = j.value("seed", c.seed);
}

std::vector<CvResult> run_static(const StaticConfig& config, const std::string& out_dir)
{
    if (config.models.empty()) {
        throw std::invalid_argument("static: no models requested");
    }
    const Trace pool = read_trace_csv(config.train_path);
    const Trace test = read_trace_csv(config.test_path);
    if (pool.variant() != config.variant || test.variant() != config.variant) {
        throw std::invalid_argument("static: dataset variant does not match the configured variant");
    }
    std::vector<CvResult> results;
    for (const auto& m : config.models) {
        const ModelConfig mc = model_config_from_json(m);
        CvConfig cv;
        cv.folds = config.folds;
        cv.evaluation = config.evaluation;
        cv.evaluation.seed = derive_seed(config.seed, {0x6576616cu});
        cv.dataset = config.dataset;
        fmt::print(stderr, "[static] {} on {}: {} folds\n", mc.id(), config.dataset, config.folds);
        results.push_back(cross_validate(seeded_factory(mc, config.variant, config.seed), pool, test, cv));
        const auto& a = results.back().aggregate;
        fmt::print(stderr, "[static] {} done: train {:.1f}s/fold, test {:.1f}s/fold\n", a.model, a.train_seconds,
                   a.test_seconds);
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        json reports = json::array();
        std::string csv = "# " + json(config).dump() + "\n" + metric_csv_header() + "\n";
        for (const auto& r : results) {
            reports.push_back(r.aggregate);
            csv += metric_csv_row(r.aggregate) + "\n";
            for (const auto& f : r.folds) {
                reports.push_back(f);
                csv += metric_csv_row(f) + "\n";
            }
        }
        write_text(fs::path(out_dir) / "static_report.json",
                   json{{"config", config}, {"reports", reports}}.dump(2) + "\n");
        write_text(fs::path(out_dir) / "static_report.csv", csv);
    }
    return results;
}

// ---------------------------------------------------------------------------

void to_json(json& j, const DynamicConfig& c)
{
    j = json{{"variant", to_string(c.variant)},
             {"models", c.models},
             {"seeds", c.seeds},
             {"epochs", c.epochs},
             {"epoch_length", c.epoch_length},
             {"planner", c.planner},
             {"mar_opt", c.mar_opt},
             {"mar_ran", c.mar_ran}};
}

void from_json(const json& j, DynamicConfig& c)
{
    c = DynamicConfig{};
    c.variant = parse_variant(j.value("variant", std::string("raw")));
    if (j.contains("models")) {
        c.models = j.at("models").get<std::vector<json>>();
    }
    if (j.contains("seeds")) {
        c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    }
    c.epochs = j.value("epochs", c.epochs);
    c.epoch_length = j.value("epoch_length", c.epoch_length);
    if (j.contains("planner")) {
        c.planner = j.at("planner").get<PlannerConfig>();
    }
    c.mar_opt = j.value("mar_opt", c.mar_opt);
    c.mar_ran = j.value("mar_ran", c.mar_ran);
}

void to_json(json& j, const DynamicSummary& s)
{
    j = json{{"model", s.model},
             {"runs", s.runs},
             {"rmar_mean", s.rmar_mean},
             {"rmar_ci90", s.rmar_ci90},
             {"mrcp70_mean", s.mrcp70_mean ? json(*s.mrcp70_mean) : json(nullptr)},
             {"mrcp70_reached", s.mrcp70_reached},
             {"diagnostics", s.diagnostics}};
}

std::vector<DynamicSummary> run_dynamic(const DynamicConfig& config, const std::string& out_dir)
{
    if (config.models.empty() || config.seeds.empty()) {
        throw std::invalid_argument("dynamic: need at least one model and one seed");
    }
    std::vector<ModelConfig> models;
    for (const auto& m : config.models) {
        models.push_back(model_config_from_json(m));
    }
    const int nm = static_cast<int>(models.size());
    const int ns = static_cast<int>(config.seeds.size());
    std::vector<MbrlResult> runs(nm * ns);
    parallel_for(nm * ns, [&](int k) {
        const ModelConfig& mc = models[k / ns];
        const std::uint64_t seed = config.seeds[k % ns];
        MbrlConfig run;
        run.epochs = config.epochs;
        run.epoch_length = config.epoch_length;
        run.planner = config.planner;
        run.seed = seed;
        if (!out_dir.empty()) {
            run.out_dir = (fs::path(out_dir) / path_label(mc.id()) / fmt::format("seed_{}", seed)).string();
        }
        const ModelFactory factory = mc.kind == ModelKind::Oracle
                                         ? ModelFactory([&](int) { return make_oracle(config.variant); })
                                         : seeded_factory(mc, config.variant, derive_seed(seed, {0x6d6f64656cu}));
        runs[k] = run_mbrl(factory, config.variant, run);
        fmt::print(stderr, "[dynamic] {} seed {}: {} epochs, last MR {:.4f}{}\n", mc.id(), seed,
                   runs[k].curve.size(), runs[k].curve.mean_rewards.back(),
                   runs[k].aborted ? " (aborted: " + runs[k].diagnostic + ")" : std::string());
    });

    std::vector<DynamicSummary> out(nm);
    for (int m = 0; m < nm; ++m) {
        DynamicSummary& s = out[m];
        s.model = models[m].id();
        std::vector<double> rmars;
        double mrcp_sum = 0.0;
        for (int i = 0; i < ns; ++i) {
            const MbrlResult& r = runs[m * ns + i];
            s.curves.push_back(r.curve);
            if (r.aborted) {
                s.diagnostics.push_back(r.diagnostic);
            }
            if (r.curve.size() < 2) {
                continue;
            }
            s.runs.push_back(dynamic_report(r.curve, config.mar_opt, config.mar_ran));
            rmars.push_back(s.runs.back().rmar);
            if (s.runs.back().mrcp70) {
                mrcp_sum += static_cast<double>(*s.runs.back().mrcp70);
                ++s.mrcp70_reached;
            }
        }
        if (!rmars.empty()) {
            std::tie(s.rmar_mean, s.rmar_ci90) = mean_ci90(rmars);
        }
        if (s.mrcp70_reached > 0) {
            s.mrcp70_mean = mrcp_sum / s.mrcp70_reached;
        }
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::string csv = "# " + json(config).dump() + "\nmodel,seed,epoch,steps_so_far,mean_reward\n";
        for (const auto& s : out) {
            for (const auto& c : s.curves) {
                std::istringstream lines(curve_csv(c, false));
                for (std::string line; std::getline(lines, line);) {
                    csv += s.model + "," + line + "\n";
                }
            }
        }
        write_text(fs::path(out_dir) / "curves.csv", csv);
        write_text(fs::path(out_dir) / "dynamic_report.json",
                   json{{"config", config}, {"summaries", out}}.dump(2) + "\n");
    }
    return out;
}

// ---------------------------------------------------------------------------

std::pair<double, double> mean_ci90(const std::vector<double>& values)
{
    if (values.empty()) {
        throw std::invalid_argument("mean_ci90: no values");
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, 1.645 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

void to_json(json& j, const PlannerComparisonConfig& c)
{
    json cells = json::array();
    for (const auto& cell : c.cells) {
        cells.push_back({{"label", cell.label}, {"planner", cell.planner}});
    }
    j = json{{"variant", to_string(c.variant)},
             {"cells", cells},
             {"rollouts", c.rollouts},
             {"episode_length", c.episode_length},
             {"seed", c.seed}};
}

void from_json(const json& j, PlannerComparisonConfig& c)
{
    c = default_planner_comparison();
    c.variant = parse_variant(j.value("variant", std::string("raw")));
    if (j.contains("cells")) {
        c.cells.clear();
        for (const auto& cell : j.at("cells")) {
            c.cells.push_back({cell.at("label").get<std::string>(), cell.at("planner").get<PlannerConfig>()});
        }
    }
    c.rollouts = j.value("rollouts", c.rollouts);
    c.episode_length = j.value("episode_length", c.episode_length);
    c.seed = j.value("seed", c.seed);
}

PlannerComparisonConfig default_planner_comparison()
{
    PlannerComparisonConfig c;
    for (int n : {10, 100, 1000}) {
        PlannerConfig p;
        p.population = n;
        c.cells.push_back({fmt::format("RS n={}", n), p});
    }
    PlannerConfig p;
    p.cem = CemConfig{};
    c.cells.push_back({"CEM n=500", p});
    return c;
}

std::vector<PlannerRow> compare_planners(const PlannerComparisonConfig& config)
{
    if (config.rollouts < 1) {
        throw std::invalid_argument("planners: need at least one rollout");
    }
    const auto oracle = make_oracle(config.variant);
    std::vector<PlannerRow> rows;
    for (std::size_t c = 0; c < config.cells.size(); ++c) {
        const auto& cell = config.cells[c];
        PlannerRow row;
        row.label = cell.label;
        row.episode_rewards.assign(config.rollouts, 0.0);
        parallel_for(config.rollouts, [&](int r) {
            Rng rng = make_rng(config.seed, {0x706c616eu, c, static_cast<std::uint64_t>(r)});
            const Trace t = planned_episode(*oracle, reset_for(config.seed, r), config.episode_length, r,
                                            cell.planner, rng);
            row.episode_rewards[r] = t.mean_reward();
        });
        std::tie(row.mean, row.ci90) = mean_ci90(row.episode_rewards);
        fmt::print(stderr, "[planners] {}: {:.4f} +- {:.4f}\n", row.label, row.mean, row.ci90);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------

Futures simulate_futures(const DensityModel& model, const Trace& trace, int start_row, int n, int horizon, Rng& rng)
{
    if (n < 1 || horizon < 1) {
        throw std::invalid_argument("futures: n and horizon must be >= 1");
    }
    const auto valid = valid_positions(trace, horizon);
    if (!std::binary_search(valid.begin(), valid.end(), start_row)) {
        throw std::out_of_range(fmt::format("futures: start step {} + horizon {} leaves its episode", start_row,
                                            horizon));
    }
    const int d = model.dim();
    Futures f;
    f.truth.resize(d, horizon + 1);
    for (int h = 0; h <= horizon; ++h) {
        f.truth.col(h) = trace.observation(start_row + h);
    }
    f.samples.assign(n, MatrixXd(d, horizon + 1));
    MatrixXd cond = condition_at(trace, start_row).replicate(1, n);
    const std::vector<int> members = draw_members(model, n, rng);
    for (int i = 0; i < n; ++i) {
        f.samples[i].col(0) = f.truth.col(0);
    }
    for (int h = 0; h < horizon; ++h) {
        const MatrixXd y = model.sample_batch(cond, members, rng);
        for (int i = 0; i < n; ++i) {
            f.samples[i].col(h + 1) = y.col(i);
            if (h + 1 < horizon) {
                try {
                    cond.col(i) = make_condition(featurize(y.col(i), model.variant()),
                                                 trace.action(start_row + h + 1));
                } catch (const std::domain_error&) {
                    cond.col(i).setConstant(std::numeric_limits<double>::quiet_NaN());
                }
            }
        }
    }
    return f;
}

std::string futures_csv(const Futures& f)
{
    const int d = static_cast<int>(f.truth.rows());
    std::string out = "kind,path,step";
    for (int j = 1; j <= d; ++j) {
        out += fmt::format(",y{}", j);
    }
    out += "\n";
    auto emit = [&](const char* kind, int path, const MatrixXd& m) {
        for (Eigen::Index h = 0; h < m.cols(); ++h) {
            out += fmt::format("{},{},{}", kind, path, h);
            for (int j = 0; j < d; ++j) {
                out += fmt::format(",{:.17g}", m(j, h));
            }
            out += "\n";
        }
    };
    emit("truth", 0, f.truth);
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
        emit("sample", static_cast<int>(i), f.samples[i]);
    }
    return out;
}

std::string endpoint_histogram_csv(const Futures& f, int bins)
{
    if (bins < 1) {
        throw std::invalid_argument("histogram: bins must be >= 1");
    }
    const int d = static_cast<int>(f.truth.rows());
    const Eigen::Index last = f.truth.cols() - 1;
    std::string out = "dim,bin_low,bin_high,count,truth\n";
    for (int j = 0; j < d; ++j) {
        double lo = f.truth(j, last);
        double hi = lo;
        for (const auto& s : f.samples) {
            if (std::isfinite(s(j, last))) {
                lo = std::min(lo, s(j, last));
                hi = std::max(hi, s(j, last));
            }
        }
        if (hi <= lo) {
            hi = lo + 1e-9;
        }
        std::vector<int> counts(bins, 0);
        for (const auto& s : f.samples) {
            const double v = s(j, last);
            if (std::isfinite(v)) {
                counts[std::clamp(static_cast<int>((v - lo) / (hi - lo) * bins), 0, bins - 1)]++;
            }
        }
        for (int b = 0; b < bins; ++b) {
            out += fmt::format("y{},{:.17g},{:.17g},{},{:.17g}\n", j + 1, lo + (hi - lo) * b / bins,
                               lo + (hi - lo) * (b + 1) / bins, counts[b], f.truth(j, last));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

Calibration calibrate(Variant variant, const PlannerConfig& planner, int rollouts, int episode_length,
                      std::uint64_t seed)
{
    if (rollouts < 1) {
        throw std::invalid_argument("calibrate: need at least one rollout");
    }
    const auto oracle = make_oracle(variant);
    std::vector<double> opt(rollouts), ran(rollouts);
    parallel_for(rollouts, [&](int r) {
        const AcrobotState s0 = reset_for(seed, r);
        Rng plan_rng = make_rng(seed, {0x6f7074u, static_cast<std::uint64_t>(r)});
        opt[r] = planned_episode(*oracle, s0, episode_length, r, planner, plan_rng).mean_reward();
        Rng ran_rng = make_rng(seed, {0x72616eu, static_cast<std::uint64_t>(r)});
        ran[r] = random_episode(s0, variant, episode_length, r, ran_rng).mean_reward();
    });
    Calibration c;
    c.rollouts = rollouts;
    std::tie(c.mar_opt, c.mar_opt_ci90) = mean_ci90(opt);
    std::tie(c.mar_ran, c.mar_ran_ci90) = mean_ci90(ran);
    return c;
}

void to_json(json& j, const Calibration& c)
{
    j = json{{"mar_opt", c.mar_opt},
             {"mar_opt_ci90", c.mar_opt_ci90},
             {"mar_ran", c.mar_ran},
             {"mar_ran_ci90", c.mar_ran_ci90},
             {"rollouts", c.rollouts}};
}

}  // namespace acrobench
