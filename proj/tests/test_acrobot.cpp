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
#include <numbers>

#include <gtest/gtest.h>

#include "acrobench/acrobot.hpp"

namespace acrobench {
namespace {

constexpr double kPi = std::numbers::pi;

// Equations of motion written as M(q) q'' = tau - h(q, q'), solved as a 2x2 system.
Eigen::Vector4d lagrangian_derivative(const Eigen::Vector4d& s, double tau)
{
    const double m1 = 1, m2 = 1, l1 = 1, lc1 = 0.5, lc2 = 0.5, i1 = 1, i2 = 1, g = 9.8;
    const double q1 = s(0), q2 = s(1), w1 = s(2), w2 = s(3);
    Eigen::Matrix2d m;
    m(0, 0) = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(q2)) + i1 + i2;
    m(0, 1) = m(1, 0) = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(q2)) + i2;
    m(1, 1) = m2 * lc2 * lc2 + i2;
    const double grav2 = m2 * lc2 * g * std::sin(q1 + q2);
    Eigen::Vector2d h;
    h(0) = -m2 * l1 * lc2 * std::sin(q2) * (w2 * w2 + 2 * w1 * w2) + (m1 * lc1 + m2 * l1) * g * std::sin(q1) + grav2;
    h(1) = m2 * l1 * lc2 * std::sin(q2) * w1 * w1 + grav2;
    const Eigen::Vector2d acc = m.fullPivLu().solve(Eigen::Vector2d(0.0, tau) - h);
    return {w1, w2, acc(0), acc(1)};
}

Eigen::Vector4d rk4(const Eigen::Vector4d& y, double tau, double h, int substeps)
{
    Eigen::Vector4d x = y;
    const double dt = h / substeps;
    for (int i = 0; i < substeps; ++i) {
        const Eigen::Vector4d k1 = lagrangian_derivative(x, tau);
        const Eigen::Vector4d k2 = lagrangian_derivative(x + 0.5 * dt * k1, tau);
        const Eigen::Vector4d k3 = lagrangian_derivative(x + 0.5 * dt * k2, tau);
        const Eigen::Vector4d k4 = lagrangian_derivative(x + dt * k3, tau);
        x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return x;
}

TEST(Acrobot, HangingEquilibriumStaysExactlyZero)
{
    AcrobotState s;
    for (int i = 0; i < 1000; ++i) {
        s = step(s, Action::Zero);
    }
    EXPECT_EQ(s, AcrobotState{});
}

TEST(Acrobot, DerivativeMatchesMassMatrixForm)
{
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector4d s(uniform01(rng) * 6 - 3, uniform01(rng) * 6 - 3, uniform01(rng) * 8 - 4,
                                uniform01(rng) * 8 - 4);
        const double tau = static_cast<double>(uniform_index(rng, 3) - 1);
        EXPECT_LT((acrobot_derivative(s, tau) - lagrangian_derivative(s, tau)).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Acrobot, StepIsOneRk4IntervalOfTheEquations)
{
    const AcrobotState s{0.05, -0.03, 0.1, -0.1};
    const Eigen::Vector4d got = step(s, Action::Positive).as_vector();
    EXPECT_LT((got - rk4(s.as_vector(), 1.0, 0.2, 1)).cwiseAbs().maxCoeff(), 1e-12);
    // A single 0.2 s RK4 step carries truncation error against the finely resolved solution.
    const Eigen::Vector4d fine = rk4(s.as_vector(), 1.0, 0.2, 1000);
    EXPECT_LT((got - fine).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Acrobot, WrapsAnglesHalfOpen)
{
    EXPECT_DOUBLE_EQ(wrap_angle(kPi), -kPi);
    EXPECT_DOUBLE_EQ(wrap_angle(-kPi), -kPi);
    EXPECT_NEAR(wrap_angle(3 * kPi + 0.5), -kPi + 0.5, 1e-12);
    EXPECT_NEAR(wrap_angle(-0.25), -0.25, 0.0);
    EXPECT_LT(wrap_angle(std::nextafter(kPi, 0.0)), kPi);

    // Fast positive rotation through the upright position.
    const AcrobotState s{kPi - 0.01, 0.0, 3.0, 0.0};
    const AcrobotState n = step(s, Action::Zero);
    EXPECT_LT(n.theta1, -kPi + 1.0);
    EXPECT_GE(n.theta1, -kPi);
}

TEST(Acrobot, ClampsVelocities)
{
    const AcrobotState s = step({0.0, 0.0, 100.0, -100.0}, Action::Positive);
    EXPECT_LE(std::abs(s.dtheta1), 4 * kPi);
    EXPECT_LE(std::abs(s.dtheta2), 9 * kPi);
}

TEST(Acrobot, ReachableStatesKeepInvariants)
{
    Rng rng(11);
    AcrobotState s = reset(rng);
    for (int i = 0; i < 20000; ++i) {
        s = step(s, action_from_index(uniform_index(rng, 3)));
        ASSERT_GE(s.theta1, -kPi);
        ASSERT_LT(s.theta1, kPi);
        ASSERT_GE(s.theta2, -kPi);
        ASSERT_LT(s.theta2, kPi);
        ASSERT_LE(std::abs(s.dtheta1), 4 * kPi);
        ASSERT_LE(std::abs(s.dtheta2), 9 * kPi);
        const Observation y = observe(s, Variant::SinCos);
        ASSERT_NEAR(y(0) * y(0) + y(1) * y(1), 1.0, 1e-9);
        ASSERT_NEAR(reward(observe(s, Variant::RawAngles), Variant::RawAngles), reward(y, Variant::SinCos), 1e-12);
    }
}

TEST(Acrobot, StepIsBitDeterministic)
{
    const AcrobotState s{0.3, -1.2, 2.5, -4.0};
    for (Action a : {Action::Negative, Action::Zero, Action::Positive}) {
        EXPECT_EQ(step(s, a), step(s, a));
    }
}

TEST(Acrobot, RewardValues)
{
    EXPECT_NEAR(reward(Eigen::Vector4d(0, 0, 0, 0), Variant::RawAngles), 0.0, 1e-15);
    EXPECT_NEAR(reward(Eigen::Vector4d(kPi, 0, 0, 0), Variant::RawAngles), 4.0, 1e-15);
    EXPECT_NEAR(reward(Eigen::Vector4d(kPi / 2, 0, 0, 0), Variant::RawAngles), 2.0, 1e-15);
    Eigen::VectorXd sc(6);
    sc << 0, -1, 0, 1, 0, 0;
    EXPECT_NEAR(reward(sc, Variant::SinCos), 4.0, 1e-15);
}

TEST(Acrobot, ResetRangeDeterminismAndMean)
{
    Rng a(5), b(5);
    EXPECT_EQ(reset(a), reset(b));
    Rng rng(99);
    Eigen::Vector4d sum = Eigen::Vector4d::Zero();
    for (int i = 0; i < 10000; ++i) {
        const Eigen::Vector4d v = reset(rng).as_vector();
        ASSERT_LE(v.cwiseAbs().maxCoeff(), 0.1);
        sum += v;
    }
    EXPECT_LT((sum / 10000).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Acrobot, ObserveAndFeaturize)
{
    Eigen::VectorXd expected(6);
    expected << 0, 1, 0, 1, 0, 0;
    EXPECT_EQ(observe(AcrobotState{}, Variant::SinCos), expected);
    EXPECT_EQ(observe(AcrobotState{kPi / 2, 0, 1, 2}, Variant::RawAngles), Eigen::Vector4d(kPi / 2, 0, 1, 2));

    FeatureVector f0;
    f0 << 0, 0, 1, 0, 0, 1, 0, 0;
    EXPECT_EQ(featurize(Eigen::Vector4d::Zero(), Variant::RawAngles), f0);
    EXPECT_EQ(featurize(expected, Variant::SinCos), f0);

    Eigen::VectorXd y(6), scaled(6);
    y << 0.6, 0.8, -0.28, 0.96, 1, 2;
    scaled = y;
    scaled.head(4) *= 1.1;
    EXPECT_NEAR(featurize(y, Variant::SinCos)(0), featurize(scaled, Variant::SinCos)(0), 1e-15);
    EXPECT_NEAR(featurize(y, Variant::SinCos)(3), featurize(scaled, Variant::SinCos)(3), 1e-15);

    Eigen::VectorXd bad(6);
    bad << 0, 0, 0, 1, 0, 0;
    EXPECT_THROW(featurize(bad, Variant::SinCos), std::domain_error);
}

TEST(Acrobot, SinCosRoundTripRecoversState)
{
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const AcrobotState s{-kPi + 2 * kPi * uniform01(rng), -kPi + 2 * kPi * uniform01(rng), uniform01(rng),
                             -uniform01(rng)};
        const FeatureVector f = featurize(observe(s, Variant::SinCos), Variant::SinCos);
        const AcrobotState r = state_from_features(f);
        EXPECT_NEAR(std::remainder(r.theta1 - s.theta1, 2 * kPi), 0.0, 1e-9);
        EXPECT_NEAR(std::remainder(r.theta2 - s.theta2, 2 * kPi), 0.0, 1e-9);
        EXPECT_NEAR(f(1), std::sin(f(0)), 1e-9);
        EXPECT_NEAR(f(5), std::cos(f(3)), 1e-9);
        EXPECT_EQ(r.dtheta1, s.dtheta1);
    }
}

TEST(Acrobot, ActionsAndVariants)
{
    EXPECT_EQ(action_from_int(-1), Action::Negative);
    EXPECT_THROW(action_from_int(2), std::invalid_argument);
    for (int i = 0; i < kNumActions; ++i) {
        EXPECT_EQ(action_index(action_from_index(i)), i);
    }
    EXPECT_EQ(parse_variant(to_string(Variant::SinCos)), Variant::SinCos);
    EXPECT_THROW(parse_variant("quaternion"), std::invalid_argument);
}

TEST(Acrobot, RandomPolicyMeanRewardNearReference)
{
    Rng rng(2024);
    double total = 0.0;
    const int episodes = 100;
    for (int e = 0; e < episodes; ++e) {
        AcrobotState s = reset(rng);
        for (int t = 0; t < 200; ++t) {
            s = step(s, action_from_index(uniform_index(rng, 3)));
            total += reward(observe(s, Variant::RawAngles), Variant::RawAngles);
        }
    }
    EXPECT_NEAR(total / (episodes * 200), 0.12, 0.05);
}

}  // namespace
}  // namespace acrobench
