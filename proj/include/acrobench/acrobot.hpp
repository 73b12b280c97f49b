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

#ifndef ACROBENCH_ACROBOT_HPP
#define ACROBENCH_ACROBOT_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "acrobench/rng.hpp"

namespace acrobench {

/// Which observable vector the environment exposes to models.
enum class Variant { RawAngles, SinCos };

constexpr int observable_dim(Variant v) noexcept { return v == Variant::RawAngles ? 4 : 6; }

std::string to_string(Variant v);
Variant parse_variant(std::string_view name);

/// Discrete torque on the lower link.
enum class Action : int { Negative = -1, Zero = 0, Positive = 1 };

constexpr int kNumActions = 3;

constexpr double torque(Action a) noexcept { return static_cast<double>(static_cast<int>(a)); }
constexpr Action action_from_index(int i) noexcept { return static_cast<Action>(i - 1); }
constexpr int action_index(Action a) noexcept { return static_cast<int>(a) + 1; }
Action action_from_int(int torque);

struct AcrobotState {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double dtheta1 = 0.0;
    double dtheta2 = 0.0;

    Eigen::Vector4d as_vector() const { return {theta1, theta2, dtheta1, dtheta2}; }
    friend bool operator==(const AcrobotState&, const AcrobotState&) = default;
};

/// Physical constants of the standard Acrobot.
struct AcrobotParams {
    static constexpr double link_length_1 = 1.0;
    static constexpr double link_mass_1 = 1.0;
    static constexpr double link_mass_2 = 1.0;
    static constexpr double link_com_1 = 0.5;
    static constexpr double link_com_2 = 0.5;
    static constexpr double link_moi = 1.0;
    static constexpr double gravity = 9.8;
    static constexpr double dt = 0.2;
    static constexpr double max_vel_1 = 4.0 * std::numbers::pi;
    static constexpr double max_vel_2 = 9.0 * std::numbers::pi;
};

using Observation = Eigen::VectorXd;

constexpr int kFeatureDim = 8;
/// Model conditioning: the feature vector followed by the applied torque.
constexpr int kConditionDim = kFeatureDim + 1;

/// [theta1, sin theta1, cos theta1, theta2, sin theta2, cos theta2, dtheta1, dtheta2]
using FeatureVector = Eigen::Matrix<double, kFeatureDim, 1>;
using Condition = Eigen::Matrix<double, kConditionDim, 1>;

/// Maps an angle into [-pi, pi).
inline double wrap_angle(double x) noexcept
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(x + std::numbers::pi, two_pi);
    if (r < 0.0) {
        r += two_pi;
    }
    r -= std::numbers::pi;
    // fmod can round up to exactly +pi for inputs just below an odd multiple of pi.
    return r >= std::numbers::pi ? -std::numbers::pi : r;
}

/// Time derivative of [theta1, theta2, dtheta1, dtheta2] ("book" equations of motion).
Eigen::Vector4d acrobot_derivative(const Eigen::Vector4d& s, double torque) noexcept;

/// One control interval: a single RK4 step of length dt, then wrap and clamp.
AcrobotState step(const AcrobotState& state, Action action) noexcept;

/// All four state variables i.i.d. uniform in [-0.1, 0.1].
AcrobotState reset(Rng& rng);

Observation observe(const AcrobotState& state, Variant variant);

/// Height of the lower link tip above the hanging position, 2 - cos t1 - cos(t1 + t2).
/// For SinCos observables the angle sum uses the entries as given, on or off the unit circle.
template <typename Derived>
double reward(const Eigen::MatrixBase<Derived>& y, Variant variant)
{
    if (variant == Variant::RawAngles) {
        return 2.0 - std::cos(y(0)) - std::cos(y(0) + y(1));
    }
    const double s1 = y(0), c1 = y(1), s2 = y(2), c2 = y(3);
    return 2.0 - c1 - (c1 * c2 - s1 * s2);
}

/// Builds the 8-dim feature vector. SinCos angles are recovered with atan2, which also
/// absorbs off-circle model outputs. Throws std::domain_error when (sin, cos) = (0, 0).
template <typename Derived>
FeatureVector featurize(const Eigen::MatrixBase<Derived>& y, Variant variant)
{
    double t1 = 0.0, t2 = 0.0, v1 = 0.0, v2 = 0.0;
    if (variant == Variant::RawAngles) {
        t1 = y(0);
        t2 = y(1);
        v1 = y(2);
        v2 = y(3);
    } else {
        if ((y(0) == 0.0 && y(1) == 0.0) || (y(2) == 0.0 && y(3) == 0.0)) {
            throw std::domain_error("featurize: (sin, cos) = (0, 0) has no angle");
        }
        t1 = std::atan2(y(0), y(1));
        t2 = std::atan2(y(2), y(3));
        v1 = y(4);
        v2 = y(5);
    }
    FeatureVector f;
    f << t1, std::sin(t1), std::cos(t1), t2, std::sin(t2), std::cos(t2), v1, v2;
    return f;
}

inline Condition make_condition(const FeatureVector& features, Action action)
{
    Condition c;
    c.head<kFeatureDim>() = features;
    c(kFeatureDim) = torque(action);
    return c;
}

/// Physical state read back from a feature vector (angles wrapped).
inline AcrobotState state_from_features(const FeatureVector& f) noexcept
{
    return {wrap_angle(f(0)), wrap_angle(f(3)), f(6), f(7)};
}

}  // namespace acrobench

#endif  // ACROBENCH_ACROBOT_HPP
