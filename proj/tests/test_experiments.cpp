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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "acrobench/experiments.hpp"

namespace acrobench {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("acrobench_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TEST(GenRandom, ShapeStartsAndActions)
{
    const Trace tr = gen_random_data(Variant::RawAngles, 10, 500, 3);
    ASSERT_EQ(tr.size(), 5000);
    ASSERT_EQ(tr.num_episodes(), 10);
    int counts[3] = {0, 0, 0};
    for (int r = 0; r < tr.size(); ++r) {
        EXPECT_EQ(tr.episode(r), r / 500);
        EXPECT_EQ(tr.t(r), r % 500);
        if (tr.t(r) == 0) {
            EXPECT_LE(tr.observation(r).cwiseAbs().maxCoeff(), 0.1);
        }
        ++counts[action_index(tr.action(r))];
    }
    // Multinomial with p = 1/3: sd = sqrt(n p (1 - p)).
    const double sd = std::sqrt(5000.0 * (1.0 / 3) * (2.0 / 3));
    for (int c : counts) {
        EXPECT_NEAR(c, 5000.0 / 3, 3 * sd);
    }

    const Trace again = gen_random_data(Variant::RawAngles, 10, 500, 3);
    std::ostringstream a, b;
    write_trace_csv(a, tr);
    write_trace_csv(b, again);
    EXPECT_EQ(a.str(), b.str());

    const Trace sc = gen_random_data(Variant::SinCos, 2, 50, 3);
    EXPECT_EQ(sc.dim(), 6);
}

TEST(GenLinear, BetterThanRandomAndReproducible)
{
    LinearPolicyConfig cfg;
    const Trace a = gen_linear_policy_data(Variant::RawAngles, 3, 200, 5, cfg);
    const Trace b = gen_linear_policy_data(Variant::RawAngles, 3, 200, 5, cfg);
    ASSERT_EQ(a.size(), 600);
    EXPECT_EQ(a.num_episodes(), 3);
    EXPECT_GT(a.mean_reward(), 0.12);
    std::ostringstream sa, sb, sr;
    write_trace_csv(sa, a);
    write_trace_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    write_trace_csv(sr, gen_random_data(Variant::RawAngles, 3, 200, 5));
    EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')), sr.str().substr(0, sr.str().find('\n')));
}

TEST(ModelConfigJson, IdOrObjectWithOverrides)
{
    EXPECT_EQ(model_config_from_json("DARMDN(10)").id(), "DARMDN(10)");
    const ModelConfig c = model_config_from_json(json{{"id", "DMDN(3)"}, {"epochs", 7}, {"hidden_width", 12}});
    EXPECT_EQ(c.components, 3);
    EXPECT_EQ(c.train.epochs, 7);
    EXPECT_EQ(c.hidden_width, 12);
    EXPECT_THROW(model_config_from_json("nope"), std::invalid_argument);
}

TEST(Futures, DeterministicAndOracleCases)
{
    const Trace tr = gen_random_data(Variant::RawAngles, 2, 60, 7);
    Rng rng(1);
    const Futures f = simulate_futures(*make_oracle(Variant::RawAngles), tr, 65, 5, 10, rng);
    ASSERT_EQ(f.samples.size(), 5u);
    EXPECT_EQ(f.truth.cols(), 11);
    for (const auto& s : f.samples) {
        EXPECT_LT((s - f.truth).cwiseAbs().maxCoeff(), 1e-12);
    }

    ModelConfig mc = ModelConfig::parse("DARNN_det");
    mc.hidden_width = 16;
    mc.train.epochs = 3;
    auto det = make_model(mc, Variant::RawAngles);
    det->fit(transitions(tr));
    const Futures g = simulate_futures(*det, tr, 3, 4, 10, rng);
    for (const auto& s : g.samples) {
        EXPECT_EQ(s, g.samples.front());
    }

    EXPECT_THROW(simulate_futures(*det, tr, 55, 4, 10, rng), std::out_of_range);  // crosses into episode 1
    EXPECT_THROW(simulate_futures(*det, tr, 200, 4, 10, rng), std::out_of_range);

    const std::string csv = futures_csv(f);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "kind,path,step,y1,y2,y3,y4");
    const std::string hist = endpoint_histogram_csv(f, 8);
    EXPECT_EQ(hist.substr(0, hist.find('\n')), "dim,bin_low,bin_high,count,truth");
}

TEST(Planners, OrderingAndConfig)
{
    PlannerComparisonConfig pc = default_planner_comparison();
    ASSERT_EQ(pc.cells.size(), 4u);
    EXPECT_EQ(nlohmann::json(nlohmann::json(pc).get<PlannerComparisonConfig>()), nlohmann::json(pc));
    pc.cells = {pc.cells[0], pc.cells[1]};  // RS n = 10, 100
    pc.rollouts = 8;
    pc.episode_length = 100;
    const auto rows = compare_planners(pc);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].episode_rewards.size(), 8u);
    EXPECT_LT(rows[0].mean, rows[1].mean);
    const auto [m, ci] = mean_ci90({1.0, 2.0, 3.0});
    EXPECT_DOUBLE_EQ(m, 2.0);
    EXPECT_NEAR(ci, 1.645 * 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(Dynamic, OracleNearOneAndRandomNearZero)
{
    DynamicConfig dc;
    dc.models = {"Oracle"};
    dc.seeds = {0, 1};
    dc.epochs = 4;
    const auto out = run_dynamic(dc);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_NEAR(out[0].rmar_mean, 1.0, 0.15);

    // Random policy from the fixed start of each seed.
    double total = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        LearningCurve c;
        for (int e = 1; e <= 4; ++e) {
            Rng rng = make_rng(s, {static_cast<std::uint64_t>(e)});
            c.mean_rewards.push_back(random_episode(start_state(s), Variant::RawAngles, 200, e, rng).mean_reward());
        }
        total += rmar(mar(c));
    }
    EXPECT_NEAR(total / seeds, 0.0, 0.05 / (kMarOpt - kMarRan) * 2);
}

json strip_times(json j)
{
    for (auto& r : j["reports"]) {
        r.erase("train_seconds");
        r.erase("test_seconds");
    }
    return j;
}

std::string strip_time_columns(const std::string& csv)
{
    // The last two columns are wall-clock seconds.
    return std::regex_replace(csv, std::regex(R"(,[0-9.]+,[0-9.]+\n)"), "\n");
}

TEST(Static, ReportRoundTripsAndRerunsIdentically)
{
    const fs::path dir = scratch("static");
    write_trace_csv((dir / "train.csv").string(), gen_random_data(Variant::RawAngles, 4, 80, 1));
    write_trace_csv((dir / "test.csv").string(), gen_random_data(Variant::RawAngles, 2, 80, 2));
    StaticConfig sc;
    sc.models = {"ARLin_sigma", json{{"id", "DARNN_det"}, {"epochs", 3}, {"hidden_width", 8}}};
    sc.train_path = (dir / "train.csv").string();
    sc.test_path = (dir / "test.csv").string();
    sc.dataset = "tiny";
    sc.folds = 2;
    sc.evaluation.long_horizon = {5, 10, 20};
    sc.seed = 4;
    EXPECT_EQ(json(json(sc).get<StaticConfig>()), json(sc));

    const auto results = run_static(sc, (dir / "a").string());
    ASSERT_EQ(results.size(), 2u);
    EXPECT_FALSE(results[1].aggregate.lr.value.has_value());
    const json report = json::parse(slurp(dir / "a" / "static_report.json"));
    EXPECT_EQ(report["config"], json(sc));
    ASSERT_EQ(report["reports"].size(), 6u);  // aggregate + 2 folds, per model
    for (const auto& r : report["reports"]) {
        EXPECT_EQ(json(r.get<MetricReport>()), r);
    }
    EXPECT_EQ(report["reports"][0], json(results[0].aggregate));

    const std::string csv = slurp(dir / "a" / "static_report.csv");
    EXPECT_EQ(csv.rfind("# ", 0), 0u);
    EXPECT_NE(csv.find(metric_csv_header()), std::string::npos);

    run_static(sc, (dir / "b").string());
    EXPECT_EQ(strip_times(json::parse(slurp(dir / "b" / "static_report.json"))), strip_times(report));
    EXPECT_EQ(strip_time_columns(slurp(dir / "b" / "static_report.csv")), strip_time_columns(csv));
    fs::remove_all(dir);
}

int run_cli(const std::string& args)
{
    const int status = std::system((std::string(ACROBENCH_CLI) + " " + args + " 2>/dev/null >/dev/null").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, EndToEndAndErrorRecords)
{
    const fs::path dir = scratch("cli");
    const std::string out = (dir / "data").string();
    ASSERT_EQ(run_cli("gen-random --seed 3 --train-episodes 3 --test-episodes 2 --length 60 --out " + out), 0);
    const std::string train = slurp(dir / "data" / "train.csv");
    EXPECT_EQ(train.rfind("# {", 0), 0u);
    EXPECT_NE(train.find("\nepisode,t,y1,y2,y3,y4,a,r\n"), std::string::npos);
    ASSERT_EQ(run_cli("gen-random --seed 3 --train-episodes 3 --test-episodes 2 --length 60 --out " + out + "2"), 0);
    EXPECT_EQ(slurp(dir / "data2" / "train.csv"), train);

    ASSERT_EQ(run_cli("fit --model ARLin_sigma --seed 1 --train " + out + "/train.csv --out " + out), 0);
    ASSERT_TRUE(fs::exists(dir / "data" / "model_1.json"));
    ASSERT_EQ(run_cli("futures --model-file " + out + "/model_1.json --trace " + out
                      + "/test.csv --start 5 --n 7 --horizon 4 --out " + out),
              0);
    EXPECT_TRUE(fs::exists(dir / "data" / "futures.csv"));
    EXPECT_TRUE(fs::exists(dir / "data" / "futures_histogram.csv"));

    // Out-of-range start: nonzero exit and a machine-readable record.
    const std::string err = (dir / "err").string();
    EXPECT_EQ(run_cli("futures --model-file " + out + "/model_1.json --trace " + out
                      + "/test.csv --start 55 --horizon 10 --out " + err),
              1);
    const json rec = json::parse(slurp(dir / "err" / "error.json"));
    EXPECT_EQ(rec["error"]["command"], "futures");
    EXPECT_EQ(rec["error"]["type"], "out_of_range");
    EXPECT_EQ(rec["error"]["exit_code"], 1);

    // Usage errors exit with 2.
    EXPECT_EQ(run_cli("static --model DARNN_det --folds 2 --train " + out + "/train.csv --test " + out
                      + "/test.csv --out " + (dir / "st").string() + " --config /nonexistent.json"),
              2);
    EXPECT_EQ(run_cli("no-such-command"), 2);
    EXPECT_EQ(run_cli("gen-random --variant polar --out " + err), 2);
    fs::remove_all(dir);
}

}  // namespace
}  // namespace acrobench
