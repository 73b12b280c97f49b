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

#include <sstream>

#include <gtest/gtest.h>

#include "acrobench/trace.hpp"

namespace acrobench {
namespace {

Trace small_trace(Variant v, int episodes, int length, std::uint64_t seed)
{
    Rng rng(seed);
    Trace t(v);
    for (int e = 0; e < episodes; ++e) {
        AcrobotState s = reset(rng);
        for (int k = 0; k < length; ++k) {
            const Action a = action_from_index(uniform_index(rng, 3));
            const AcrobotState n = step(s, a);
            t.append(e, k, observe(s, v), a, reward(observe(n, v), v));
            s = n;
        }
    }
    return t;
}

TEST(Trace, CsvHeaderAndExactRoundTrip)
{
    for (Variant v : {Variant::RawAngles, Variant::SinCos}) {
        const Trace t = small_trace(v, 3, 7, 1);
        std::stringstream ss;
        write_trace_csv(ss, t, R"({"seed":1})");
        std::string first, second;
        std::getline(ss, first);
        std::getline(ss, second);
        EXPECT_EQ(first, R"(# {"seed":1})");
        EXPECT_EQ(second, v == Variant::RawAngles ? "episode,t,y1,y2,y3,y4,a,r" : "episode,t,y1,y2,y3,y4,y5,y6,a,r");
        ss.seekg(0);
        std::string meta;
        const Trace back = read_trace_csv(ss, &meta);
        EXPECT_EQ(meta, R"({"seed":1})");
        ASSERT_EQ(back.size(), t.size());
        EXPECT_EQ(back.variant(), v);
        EXPECT_EQ(back.observations(), t.observations());
        for (int r = 0; r < t.size(); ++r) {
            EXPECT_EQ(back.reward(r), t.reward(r));
            EXPECT_EQ(back.action(r), t.action(r));
            EXPECT_EQ(back.episode(r), t.episode(r));
            EXPECT_EQ(back.t(r), t.t(r));
        }
    }
}

TEST(Trace, RejectsMalformedFiles)
{
    std::stringstream bad_header("episode,t,y1,a,r\n");
    EXPECT_THROW(read_trace_csv(bad_header), std::runtime_error);
    std::stringstream bad_row("episode,t,y1,y2,y3,y4,a,r\n0,0,1,2,3\n");
    EXPECT_THROW(read_trace_csv(bad_row), std::runtime_error);
    std::stringstream bad_action("episode,t,y1,y2,y3,y4,a,r\n0,0,1,2,3,4,5,0\n");
    EXPECT_THROW(read_trace_csv(bad_action), std::invalid_argument);
}

TEST(Trace, TransitionsStayWithinEpisodes)
{
    const Trace t = small_trace(Variant::RawAngles, 4, 10, 2);
    const TransitionSet ts = transitions(t);
    ASSERT_EQ(ts.size(), 4 * 9);
    for (int i = 0; i < ts.size(); ++i) {
        const int r = ts.rows[i];
        EXPECT_EQ(t.episode(r), t.episode(r + 1));
        EXPECT_EQ(ts.targets.col(i), t.observation(r + 1));
        EXPECT_EQ(ts.conditions(kFeatureDim, i), torque(t.action(r)));
        EXPECT_EQ(ts.conditions(0, i), t.observation(r)(0));
    }
}

TEST(Trace, RewardColumnIsRewardOfNextObservation)
{
    const Trace t = small_trace(Variant::SinCos, 1, 20, 3);
    for (int r = 0; r + 1 < t.size(); ++r) {
        EXPECT_NEAR(t.reward(r), reward(t.observation(r + 1), Variant::SinCos), 1e-15);
    }
}

TEST(Trace, SelectEpisodesRenumbers)
{
    const Trace t = small_trace(Variant::RawAngles, 5, 6, 4);
    const Trace s = t.select_episodes({4, 1});
    ASSERT_EQ(s.num_episodes(), 2);
    EXPECT_EQ(s.episode(0), 0);
    EXPECT_EQ(s.episode(6), 1);
    EXPECT_EQ(s.observation(0), t.observation(24));
    EXPECT_EQ(s.observation(6), t.observation(6));
}

TEST(Trace, EpisodeBreaksOnTimeDiscontinuity)
{
    Trace t(Variant::RawAngles);
    const Observation y = Eigen::Vector4d::Zero();
    t.append(0, 0, y, Action::Zero, 0);
    t.append(0, 1, y, Action::Zero, 0);
    t.append(0, 0, y, Action::Zero, 0);
    EXPECT_EQ(t.num_episodes(), 2);
    EXPECT_EQ(transitions(t).size(), 1);
    EXPECT_THROW(t.append(0, 1, Eigen::VectorXd::Zero(6), Action::Zero, 0), std::invalid_argument);
}

}  // namespace
}  // namespace acrobench
