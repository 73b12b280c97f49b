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

// acrobench: dataset generation, static and dynamic benchmarks, planner comparison,
// futures simulation and MAR calibration.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "acrobench/experiments.hpp"
#include "acrobench/parallel.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace acrobench;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    std::optional<std::string> variant;
    std::vector<std::string> models;
    int threads = 1;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "Base seed");
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--variant", c.variant, "Observable variant")->check(CLI::IsMember({"raw", "sincos"}));
    app->add_option("--model", c.models, "Model id, e.g. DARMDN(10) (repeatable)");
    app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

json load_config(const Common& c)
{
    if (c.config.empty()) {
        return json::object();
    }
    std::ifstream is(c.config);
    return json::parse(is);
}

void write_file(const fs::path& path, const std::string& content)
{
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot write " + path.string());
    }
    os << content;
}

struct DataOptions {
    int train_episodes = 10;
    int test_episodes = 40;
    int length = 500;
};

void add_data(CLI::App* app, DataOptions& d)
{
    app->add_option("--train-episodes", d.train_episodes, "Episodes in the training pool");
    app->add_option("--test-episodes", d.test_episodes, "Episodes in the test file");
    app->add_option("--length", d.length, "Episode length");
}

void gen_data(const std::string& command, const Common& c, const DataOptions& d)
{
    json cfg = load_config(c);
    const Variant variant = parse_variant(c.variant.value_or(cfg.value("variant", std::string("raw"))));
    const std::uint64_t seed = c.seed.value_or(cfg.value("seed", std::uint64_t{0}));
    const int train_eps = cfg.value("train_episodes", d.train_episodes);
    const int test_eps = cfg.value("test_episodes", d.test_episodes);
    const int length = cfg.value("length", d.length);
    LinearPolicyConfig lin;
    if (cfg.contains("planner")) {
        lin.planner = cfg.at("planner").get<PlannerConfig>();
    }
    for (const auto& [name, episodes, tag] :
         {std::tuple{"train", train_eps, 1u}, std::tuple{"test", test_eps, 2u}}) {
        const std::uint64_t s = derive_seed(seed, {tag});
        const Trace t = command == "gen-random" ? gen_random_data(variant, episodes, length, s)
                                                : gen_linear_policy_data(variant, episodes, length, s, lin);
        const json meta{{"command", command},
                        {"split", name},
                        {"variant", to_string(variant)},
                        {"episodes", episodes},
                        {"length", length},
                        {"seed", seed},
                        {"split_seed", s}};
        const fs::path path = fs::path(c.out) / fmt::format("{}.csv", name);
        fs::create_directories(c.out);
        write_trace_csv(path.string(), t, meta.dump());
        fmt::print(stderr, "[{}] wrote {} ({} rows, mean reward {:.4f})\n", command, path.string(), t.size(),
                   t.mean_reward());
    }
}

json error_record(const std::string& command, const std::string& type, const std::string& message, int code)
{
    return {{"error", {{"command", command}, {"type", type}, {"message", message}, {"exit_code", code}}}};
}

std::string error_type(const std::exception& e)
{
    if (dynamic_cast<const CapabilityError*>(&e)) return "capability";
    if (dynamic_cast<const FitError*>(&e)) return "fit";
    if (dynamic_cast<const std::out_of_range*>(&e)) return "out_of_range";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    if (dynamic_cast<const json::exception*>(&e)) return "config";
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return "io";
    return "runtime";
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acrobot model-based RL benchmark"};
    app.require_subcommand(1);

    Common common;
    DataOptions data;

    auto* gen_random = app.add_subcommand("gen-random", "Random-policy train pool and test file");
    add_common(gen_random, common);
    add_data(gen_random, data);

    auto* gen_linear = app.add_subcommand("gen-linear", "Linear-model RS policy train pool and test file");
    add_common(gen_linear, common);
    add_data(gen_linear, data);

    std::string train_path, test_path, dataset;
    int folds = 10;
    bool per_dim_filter = false;
    auto* stat = app.add_subcommand("static", "Cross-validated static metrics");
    add_common(stat, common);
    stat->add_option("--train", train_path, "Training pool CSV");
    stat->add_option("--test", test_path, "Test CSV");
    stat->add_option("--dataset", dataset, "Dataset label in the report");
    stat->add_option("--folds", folds, "Cross-validation folds");
    stat->add_flag("--per-dimension-filter", per_dim_filter, "Outlier filter on one-dimensional densities");

    std::vector<std::uint64_t> seeds;
    int epochs = 100;
    int epoch_length = 200;
    auto* dyn = app.add_subcommand("dynamic", "MBRL learning curves, MAR, RMAR and MRCP(70)");
    add_common(dyn, common);
    dyn->add_option("--seeds", seeds, "Run seeds (overrides --seed)");
    dyn->add_option("--epochs", epochs, "Epochs N");
    dyn->add_option("--epoch-length", epoch_length, "Steps per epoch T");

    int rollouts = 50;
    auto* planners = app.add_subcommand("planners", "RS and CEM on the true dynamics");
    add_common(planners, common);
    planners->add_option("--rollouts", rollouts, "Episodes per planner");

    std::string model_file, trace_file;
    int start = 0, samples = 100, horizon = 10;
    auto* futures = app.add_subcommand("futures", "Simulated futures from one trace position");
    add_common(futures, common);
    futures->add_option("--model-file", model_file, "Fitted model JSON (from `fit`)")->required();
    futures->add_option("--trace", trace_file, "Trace CSV")->required();
    futures->add_option("--start", start, "Start row");
    futures->add_option("--n", samples, "Number of simulated paths");
    futures->add_option("--horizon", horizon, "Steps to simulate");

    auto* cal = app.add_subcommand("calibrate", "Recompute MAR_opt and MAR_ran locally");
    add_common(cal, common);
    cal->add_option("--rollouts", rollouts, "Episodes per policy");
    cal->add_option("--epoch-length", epoch_length, "Episode length");

    auto* fit = app.add_subcommand("fit", "Fit one model on a trace and save it");
    add_common(fit, common);
    fit->add_option("--train", train_path, "Training CSV")->required();

    std::string command = "acrobench";
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << error_record(command, "usage", e.what(), 2).dump() << '\n';
        return 2;
    }

    try {
        set_worker_threads(common.threads);
        const json cfg = load_config(common);
        const std::uint64_t seed = common.seed.value_or(cfg.value("seed", std::uint64_t{0}));
        const fs::path out(common.out);

        if (*gen_random || *gen_linear) {
            command = *gen_random ? "gen-random" : "gen-linear";
            gen_data(command, common, data);
        } else if (*stat) {
            command = "static";
            StaticConfig sc = cfg.get<StaticConfig>();
            if (common.variant) sc.variant = parse_variant(*common.variant);
            if (!common.models.empty()) sc.models.assign(common.models.begin(), common.models.end());
            if (!train_path.empty()) sc.train_path = train_path;
            if (!test_path.empty()) sc.test_path = test_path;
            if (!dataset.empty()) sc.dataset = dataset;
            if (stat->count("--folds") > 0) sc.folds = folds;
            if (per_dim_filter) sc.evaluation.lr.per_dimension = true;
            sc.seed = seed;
            if (sc.dataset.empty()) sc.dataset = fs::path(sc.train_path).parent_path().filename().string();
            const auto results = run_static(sc, out.string());
            for (const auto& r : results) {
                std::cout << metric_csv_row(r.aggregate) << '\n';
            }
        } else if (*dyn) {
            command = "dynamic";
            DynamicConfig dc = cfg.get<DynamicConfig>();
            if (common.variant) dc.variant = parse_variant(*common.variant);
            if (!common.models.empty()) dc.models.assign(common.models.begin(), common.models.end());
            if (!seeds.empty()) {
                dc.seeds = seeds;
            } else if (common.seed) {
                dc.seeds = {*common.seed};
            }
            if (dyn->count("--epochs") > 0) dc.epochs = epochs;
            if (dyn->count("--epoch-length") > 0) dc.epoch_length = epoch_length;
            for (const auto& s : run_dynamic(dc, out.string())) {
                std::cout << json(s).dump() << '\n';
            }
        } else if (*planners) {
            command = "planners";
            PlannerComparisonConfig pc = cfg.get<PlannerComparisonConfig>();
            if (common.variant) pc.variant = parse_variant(*common.variant);
            if (planners->count("--rollouts") > 0) pc.rollouts = rollouts;
            pc.seed = seed;
            const auto rows = compare_planners(pc);
            std::string csv = "# " + json(pc).dump() + "\nplanner,mean_reward,ci90,rollouts\n";
            for (const auto& r : rows) {
                csv += fmt::format("{},{:.17g},{:.17g},{}\n", r.label, r.mean, r.ci90, r.episode_rewards.size());
            }
            write_file(out / "planners.csv", csv);
            std::cout << csv;
        } else if (*futures) {
            command = "futures";
            const auto model = load_model(model_file);
            const Trace trace = read_trace_csv(trace_file);
            Rng rng = make_rng(seed, {0x66757475u});
            const Futures f = simulate_futures(*model, trace, start, samples, horizon, rng);
            const json meta{{"model", model->id()}, {"model_file", model_file}, {"trace", trace_file},
                            {"start", start},       {"n", samples},             {"horizon", horizon},
                            {"seed", seed}};
            write_file(out / "futures.csv", "# " + meta.dump() + "\n" + futures_csv(f));
            write_file(out / "futures_histogram.csv", "# " + meta.dump() + "\n" + endpoint_histogram_csv(f));
        } else if (*cal) {
            command = "calibrate";
            const Variant variant = parse_variant(common.variant.value_or(cfg.value("variant", std::string("raw"))));
            PlannerConfig pc = cfg.contains("planner") ? cfg.at("planner").get<PlannerConfig>() : PlannerConfig{};
            const int n = cal->count("--rollouts") > 0 ? rollouts : cfg.value("rollouts", rollouts);
            const int len = cal->count("--epoch-length") > 0 ? epoch_length : cfg.value("epoch_length", epoch_length);
            const Calibration c = calibrate(variant, pc, n, len, seed);
            const json record{{"config", {{"variant", to_string(variant)}, {"planner", pc}, {"rollouts", n},
                                          {"epoch_length", len}, {"seed", seed}}},
                              {"calibration", c}};
            write_file(out / "calibration.json", record.dump(2) + "\n");
            std::cout << record.dump() << '\n';
        } else if (*fit) {
            command = "fit";
            const Trace trace = read_trace_csv(train_path);
            if (common.models.size() != 1) {
                throw std::invalid_argument("fit: exactly one --model is required");
            }
            ModelConfig mc = ModelConfig::parse(common.models.front());
            mc.train.seed = seed;
            auto model = make_model(mc, trace.variant());
            model->fit(transitions(trace));
            fs::create_directories(out);
            const fs::path path = out / fmt::format("model_{}.json", seed);
            save_model(path.string(), *model);
            std::cout << json{{"model", model->id()}, {"file", path.string()}, {"seed", seed}}.dump() << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        const json rec = error_record(command, error_type(e), e.what(), 1);
        std::cerr << rec.dump() << '\n';
        std::error_code ec;
        fs::create_directories(common.out, ec);
        std::ofstream(fs::path(common.out) / "error.json") << rec.dump(2) << '\n';
        return 1;
    }
}
