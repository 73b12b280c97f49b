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

// Acceptance run: one [PASS]/[FAIL] line per criterion. The fast group covers 1-6 and 10,
// the heavy group the scaled static and dynamic reproductions (7-9).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "acrobench/experiments.hpp"
#include "acrobench/parallel.hpp"
#include "gradcheck.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace acrobench;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    json data;
};

// ---------------------------------------------------------------------------
// 1-3: planners and random policy on the true dynamics

Outcome planner_cell(const PlannerConfig& planner, const std::string& label, double target, int rollouts)
{
    PlannerComparisonConfig pc;
    pc.cells = {{label, planner}};
    pc.rollouts = rollouts;
    pc.episode_length = 200;
    pc.seed = 2024;
    const PlannerRow row = compare_planners(pc).front();
    Outcome o;
    o.pass = std::abs(row.mean - target) <= 0.08;
    o.detail = fmt::format("{} on true dynamics: {:.4f} +- {:.4f} over {} rollouts (target {:.2f} +- 0.08)", label,
                           row.mean, row.ci90, rollouts, target);
    o.data = {{"mean", row.mean}, {"ci90", row.ci90}, {"rollouts", rollouts}};
    return o;
}

Outcome criterion_1()
{
    PlannerConfig rs;
    return planner_cell(rs, "RS n=100 L=10", 2.10, 100);
}

Outcome criterion_2()
{
    PlannerConfig cem;
    cem.cem = CemConfig{500, 50, 5, 0.1};
    return planner_cell(cem, "CEM n=500", 2.32, 100);
}

Outcome criterion_3()
{
    const int episodes = 200;
    std::vector<double> mr(episodes);
    for (int e = 0; e < episodes; ++e) {
        Rng rng = make_rng(77, {static_cast<std::uint64_t>(e)});
        const AcrobotState s0 = reset(rng);
        mr[e] = random_episode(s0, Variant::RawAngles, 200, e, rng).mean_reward();
    }
    const auto [mean, ci] = mean_ci90(mr);
    Outcome o;
    o.pass = std::abs(mean - 0.12) <= 0.05;
    o.detail = fmt::format("random policy: {:.4f} +- {:.4f} over {} episodes (target 0.12 +- 0.05)", mean, ci,
                           episodes);
    o.data = {{"mean", mean}, {"ci90", ci}};
    return o;
}

// ---------------------------------------------------------------------------
// 4: gradient oracle at the default widths

Outcome criterion_4()
{
    Rng rng(4);
    const int batch = 4;
    auto random_matrix = [&](int rows, int cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            m(i) = standard_normal(rng);
        }
        return m;
    };
    long checked = 0, failures = 0;
    double worst = 0.0, max_abs = 0.0;
    std::vector<std::string> parts;
    auto run = [&](const std::string& name, int in, int width, int components, int dims) {
        LossSpec loss;
        loss.kind = LossKind::MixtureNll;
        loss.components = components;
        loss.dims = dims;
        const auto net = Mlp<double>::random({in, {width, width, width}, loss.output_dim(), Activation::Relu}, rng);
        const auto r = testing::check_gradients(net, random_matrix(in, batch), random_matrix(dims, batch), loss);
        checked += r.checked;
        failures += r.failures;
        worst = std::max(worst, r.worst_relative);
        max_abs = std::max(max_abs, r.max_abs_diff);
        parts.push_back(fmt::format("{} {}/{} ok", name, r.checked - r.failures, r.checked));
    };
    const auto dmdn = ModelConfig::defaults(ModelKind::DMDN, 3);
    run("DMDN(3)", kConditionDim, dmdn.hidden_width, 3, 4);
    const auto darmdn = ModelConfig::defaults(ModelKind::DARMDN, 3);
    for (int j = 0; j < 4; ++j) {
        run(fmt::format("DARMDN(3)[{}]", j), kConditionDim + j, darmdn.hidden_width, 3, 1);
    }
    Outcome o;
    o.pass = failures == 0 && checked > 0;
    o.detail = fmt::format("mixture NLL gradients vs central differences: {}; max abs diff {:.1e}, worst relative "
                           "(|g| >= 1e-4) {:.1e}",
                           fmt::join(parts, ", "), max_abs, worst);
    o.data = {{"checked", checked}, {"failures", failures}, {"worst_relative", worst}, {"max_abs_diff", max_abs}};
    return o;
}

// ---------------------------------------------------------------------------
// 5: quadrature of fitted one-dimensional predictives

double integrate_mixture(const Mixture& m)
{
    // Union of the +-10 sigma windows of the components, each piece sampled finely
    // relative to the narrowest component overlapping it.
    struct Piece {
        double lo, hi, sigma;
    };
    std::vector<Piece> pieces;
    for (int l = 0; l < m.components(); ++l) {
        pieces.push_back({m.means(0, l) - 10 * m.sigmas(0, l), m.means(0, l) + 10 * m.sigmas(0, l), m.sigmas(0, l)});
    }
    std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.lo < b.lo; });
    std::vector<Piece> merged;
    for (const Piece& p : pieces) {
        if (!merged.empty() && p.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, p.hi);
            merged.back().sigma = std::min(merged.back().sigma, p.sigma);
        } else {
            merged.push_back(p);
        }
    }
    double total = 0.0;
    Eigen::VectorXd y(1);
    for (const Piece& p : merged) {
        const long n = std::max<long>(200, static_cast<long>(std::ceil((p.hi - p.lo) / (p.sigma / 8))));
        const double h = (p.hi - p.lo) / static_cast<double>(n);
        double s = 0.0;
        for (long i = 0; i <= n; ++i) {
            y(0) = p.lo + static_cast<double>(i) * h;
            s += (i == 0 || i == n ? 0.5 : 1.0) * std::exp(log_density(m, y));
        }
        total += s * h;
    }
    return total;
}

Outcome criterion_5()
{
    const Trace train = gen_random_data(Variant::RawAngles, 4, 500, 51);
    const Trace probe = gen_random_data(Variant::RawAngles, 4, 500, 52);
    const TransitionSet all = transitions(probe);
    Rng rng(5);
    const auto pick = shuffled_indices(all.size(), rng);
    Eigen::MatrixXd cond(kConditionDim, 100), targets(4, 100);
    for (int i = 0; i < 100; ++i) {
        cond.col(i) = all.conditions.col(pick[i]);
        targets.col(i) = all.targets.col(pick[i]);
    }
    double worst = 0.0;
    int checked = 0;
    std::vector<std::string> parts;
    for (const char* id : {"DMDN(3)", "DARMDN(3)", "DARMDN(10)", "PETS"}) {
        auto m = make_model(id, Variant::RawAngles);
        m->fit(transitions(train));
        const auto table = m->marginals(targets, cond);
        double w = 0.0;
        for (const auto& per_dim : table) {
            for (const Mixture& mix : per_dim) {
                w = std::max(w, std::abs(integrate_mixture(mix) - 1.0));
                ++checked;
            }
        }
        worst = std::max(worst, w);
        parts.push_back(fmt::format("{} max|I-1| {:.1e}", id, w));
    }
    Outcome o;
    o.pass = worst <= 1e-3;
    o.detail = fmt::format("{} fitted predictives over 100 conditions: {}", checked, fmt::join(parts, ", "));
    o.data = {{"worst", worst}, {"checked", checked}};
    return o;
}

// ---------------------------------------------------------------------------
// 6: metric sanity

Outcome criterion_6()
{
    const Trace train = gen_random_data(Variant::RawAngles, 10, 500, 61);
    const Trace test = gen_random_data(Variant::RawAngles, 10, 500, 62);
    const double r2 = r2_score(*make_oracle(Variant::RawAngles), test).value;

    // Baseline against itself on the trace it was fitted on, default (joint) filter. The
    // per-dimension filter result is reported alongside.
    BaselineGaussian base(Variant::RawAngles);
    base.fit(transitions(train));
    const LrResult self = lr_score(base, train, base);
    const LrResult self_per_dim = lr_score(base, train, base, {kDefaultPMin, true});

    auto lin = make_model("ARLin_sigma", Variant::RawAngles);
    lin->fit(transitions(train));
    const int rows = 5000;
    const double critical = 1.63 / std::sqrt(rows - 1.0);
    int below = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng = make_rng(6, {static_cast<std::uint64_t>(seed)});
        Trace tr(Variant::RawAngles);
        Observation y = observe(reset(rng), Variant::RawAngles);
        for (int t = 0; t < rows; ++t) {
            const Action a = action_from_index(uniform_index(rng, kNumActions));
            tr.append(0, t, y, a, 0.0);
            y = lin->sample(make_condition(featurize(y, Variant::RawAngles), a), rng);
        }
        below += ks_score(*lin, tr).value < critical;
    }
    const bool r2_ok = std::abs(r2 - 1.0) <= 1e-9;
    const bool lr_ok = self.lr && std::abs(*self.lr - 1.0) <= 1e-6 && self.or_rate == 0.0;
    const bool ks_ok = below >= 95;
    Outcome o;
    o.pass = r2_ok && lr_ok && ks_ok;
    o.detail = fmt::format("oracle R2 = 1 {:+.1e}; baseline self LR = {:.9f}, OR = {:.4f} with the joint filter "
                           "(per-dimension filter: LR {:.9f}, OR {:.4f}); self-sampled KS < {:.4f} in {}/100 seeds",
                           r2 - 1.0, self.lr.value_or(NAN), self.or_rate, self_per_dim.lr.value_or(NAN),
                           self_per_dim.or_rate, critical, below);
    o.data = {{"oracle_r2", r2},
              {"self_lr", self.lr.value_or(NAN)},
              {"self_or", self.or_rate},
              {"self_or_per_dimension", self_per_dim.or_rate},
              {"ks_below", below}};
    return o;
}

// ---------------------------------------------------------------------------
// 7: static separation on linear-policy data

Outcome criterion_7(const fs::path& out)
{
    const fs::path dir = out / "static";
    fs::create_directories(dir);
    const Trace pool = gen_linear_policy_data(Variant::RawAngles, 10, 500, derive_seed(7, {1}));
    const Trace test = gen_linear_policy_data(Variant::RawAngles, 40, 500, derive_seed(7, {2}));
    write_trace_csv((dir / "train.csv").string(), pool, json{{"seed", 7}, {"split", "train"}}.dump());
    write_trace_csv((dir / "test.csv").string(), test, json{{"seed", 7}, {"split", "test"}}.dump());
    fmt::print(stderr, "[acceptance] linear-policy data: train mean reward {:.3f}, test {:.3f}\n", pool.mean_reward(),
               test.mean_reward());

    StaticConfig sc;
    sc.models = {"DARMDN(10)", "DARMDN(1)"};
    sc.train_path = (dir / "train.csv").string();
    sc.test_path = (dir / "test.csv").string();
    sc.dataset = "linear_raw";
    sc.folds = 3;
    sc.seed = 7;
    const auto results = run_static(sc, dir.string());
    const double r10 = results[0].aggregate.r2_L.value.value_or(NAN);
    const double r1 = results[1].aggregate.r2_L.value.value_or(NAN);
    Outcome o;
    o.pass = r10 - r1 > 0.3;
    o.detail = fmt::format("3-fold R2(10) on raw linear-policy data: DARMDN(10) {:.4f} +- {:.4f}, DARMDN(1) {:.4f} "
                           "+- {:.4f}, gap {:.4f} (need > 0.3)",
                           r10, results[0].aggregate.r2_L.ci90, r1, results[1].aggregate.r2_L.ci90, r10 - r1);
    o.data = {{"DARMDN(10)", results[0].aggregate}, {"DARMDN(1)", results[1].aggregate}};
    return o;
}

// ---------------------------------------------------------------------------
// 8-9: scaled MBRL runs

double last_epochs_mean(const DynamicSummary& s, int last)
{
    double total = 0.0;
    int count = 0;
    for (const auto& c : s.curves) {
        for (int e = std::max(0, c.size() - last); e < c.size(); ++e) {
            total += c.mean_rewards[e];
            ++count;
        }
    }
    return count > 0 ? total / count : NAN;
}

std::vector<DynamicSummary> scaled_dynamic(Variant variant, std::vector<json> models, const fs::path& dir)
{
    DynamicConfig dc;
    dc.variant = variant;
    dc.models = std::move(models);
    dc.seeds = {0, 1, 2};
    dc.epochs = 30;
    dc.epoch_length = 200;
    return run_dynamic(dc, dir.string());
}

Outcome criterion_8(const fs::path& out)
{
    const auto s = scaled_dynamic(Variant::RawAngles, {"DARMDN(10)", "DARMDN(1)"}, out / "dynamic_raw");
    const double m10 = last_epochs_mean(s[0], 10);
    const double m1 = last_epochs_mean(s[1], 10);
    Outcome o;
    o.pass = m10 - m1 >= 0.25;
    o.detail = fmt::format("raw angles, N=30 x 3 seeds, last-10-epoch mean reward: DARMDN(10) {:.4f} (RMAR {:.3f}), "
                           "DARMDN(1) {:.4f} (RMAR {:.3f}), gap {:.4f} (need >= 0.25)",
                           m10, s[0].rmar_mean, m1, s[1].rmar_mean, m10 - m1);
    o.data = {{"DARMDN(10)", s[0]}, {"DARMDN(1)", s[1]}};
    return o;
}

Outcome criterion_9(const fs::path& out)
{
    const auto s = scaled_dynamic(Variant::SinCos, {"DARMDN(1)_det", "DARMDN(1)"}, out / "dynamic_sincos");
    const double det = last_epochs_mean(s[0], 10);
    const double sto = last_epochs_mean(s[1], 10);
    Outcome o;
    o.pass = std::abs(det - sto) <= 0.15 && s[0].rmar_mean >= 0.85;
    o.detail = fmt::format("sincos, N=30 x 3 seeds: DARMDN(1)_det last-10 {:.4f} (RMAR {:.3f}), DARMDN(1) last-10 "
                           "{:.4f} (RMAR {:.3f}); |gap| {:.4f} (need <= 0.15), RMAR_det need >= 0.85",
                           det, s[0].rmar_mean, sto, s[1].rmar_mean, std::abs(det - sto));
    o.data = {{"DARMDN(1)_det", s[0]}, {"DARMDN(1)", s[1]}};
    return o;
}

// ---------------------------------------------------------------------------
// 10: the property and unit suites

Outcome criterion_10()
{
    const std::vector<std::string> suites{ACROBENCH_UNIT_TESTS};
    std::vector<std::string> failed;
    for (const auto& s : suites) {
        const fs::path exe = fs::path(ACROBENCH_TEST_DIR) / s;
        const int status = std::system(fmt::format("\"{}\" --gtest_brief=1 > /dev/null 2>&1", exe.string()).c_str());
        if (status != 0) {
            failed.push_back(s);
        }
    }
    Outcome o;
    o.pass = failed.empty();
    o.detail = failed.empty() ? fmt::format("all {} module suites pass", suites.size())
                              : fmt::format("failing suites: {}", fmt::join(failed, ", "));
    o.data = {{"suites", suites}, {"failed", failed}};
    return o;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::string group = "fast";
    std::string out = "acceptance_out";
    std::vector<int> only;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_option("--group", group, "fast | heavy | all")->check(CLI::IsMember({"fast", "heavy", "all"}));
    app.add_option("--out", out, "Directory for data and reports");
    app.add_option("--only", only, "Run only these criteria");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    set_worker_threads(threads);

    const fs::path dir = fs::path(out) / group;
    fs::remove_all(dir);
    fs::create_directories(dir);

    struct Criterion {
        int id;
        bool heavy;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, false, criterion_1},
        {2, false, criterion_2},
        {3, false, criterion_3},
        {4, false, criterion_4},
        {5, false, criterion_5},
        {6, false, criterion_6},
        {7, true, [&] { return criterion_7(dir); }},
        {8, true, [&] { return criterion_8(dir); }},
        {9, true, [&] { return criterion_9(dir); }},
        {10, false, criterion_10},
    };

    json report = json::object();
    int failures = 0;
    for (const auto& c : criteria) {
        if ((group == "fast" && c.heavy) || (group == "heavy" && !c.heavy)) {
            continue;
        }
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = fmt::format("error: {}", e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        fmt::print("[{}] criterion {}: {} ({:.0f} s)\n", o.pass ? "PASS" : "FAIL", c.id, o.detail, secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
        report[std::to_string(c.id)] = {{"pass", o.pass}, {"detail", o.detail}, {"seconds", secs}, {"data", o.data}};
        std::ofstream(dir / "acceptance_report.json") << report.dump(2) << '\n';
    }
    return failures == 0 ? 0 : 1;
}
