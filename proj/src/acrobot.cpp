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

#include "acrobench/acrobot.hpp"

#include <algorithm>

namespace acrobench {

std::string to_string(Variant v)
{
    return v == Variant::RawAngles ? "raw" : "sincos";
}

Variant parse_variant(std::string_view name)
{
    if (name == "raw" || name == "raw_angles" || name == "RawAngles") {
        return Variant::RawAngles;
    }
    if (name == "sincos" || name == "SinCos") {
        return Variant::SinCos;
    }
    throw std::invalid_argument("unknown variant: " + std::string(name));
}

Action action_from_int(int t)
{
    if (t < -1 || t > 1) {
        throw std::invalid_argument("torque must be -1, 0 or 1, got " + std::to_string(t));
    }
    return static_cast<Action>(t);
}

Eigen::Vector4d acrobot_derivative(const Eigen::Vector4d& s, double a) noexcept
{
    using P = AcrobotParams;
    constexpr double m1 = P::link_mass_1, m2 = P::link_mass_2;
    constexpr double l1 = P::link_length_1;
    constexpr double lc1 = P::link_com_1, lc2 = P::link_com_2;
    constexpr double I1 = P::link_moi, I2 = P::link_moi;
    constexpr double g = P::gravity;

    const double theta1 = s(0), theta2 = s(1), dtheta1 = s(2), dtheta2 = s(3);
    const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(theta2)) + I1 + I2;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + I2;
    // cos(x - pi/2) written as sin(x) so the hanging rest state is an exact fixed point.
    const double phi2 = m2 * lc2 * g * std::sin(theta1 + theta2);
    const double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2)
                        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2)
                        + (m1 * lc1 + m2 * l1) * g * std::sin(theta1) + phi2;
    const double ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2)
                            / (m2 * lc2 * lc2 + I2 - d2 * d2 / d1);
    const double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    return {dtheta1, dtheta2, ddtheta1, ddtheta2};
}

AcrobotState step(const AcrobotState& state, Action action) noexcept
{
    using P = AcrobotParams;
    const double a = torque(action);
    const double h = P::dt;
    const Eigen::Vector4d y0 = state.as_vector();
    const Eigen::Vector4d k1 = acrobot_derivative(y0, a);
    const Eigen::Vector4d k2 = acrobot_derivative(y0 + 0.5 * h * k1, a);
    const Eigen::Vector4d k3 = acrobot_derivative(y0 + 0.5 * h * k2, a);
    const Eigen::Vector4d k4 = acrobot_derivative(y0 + h * k3, a);
    const Eigen::Vector4d y1 = y0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return {wrap_angle(y1(0)), wrap_angle(y1(1)),
            std::clamp(y1(2), -P::max_vel_1, P::max_vel_1),
            std::clamp(y1(3), -P::max_vel_2, P::max_vel_2)};
}

AcrobotState reset(Rng& rng)
{
    auto draw = [&rng] { return -0.1 + 0.2 * uniform01(rng); };
    AcrobotState s;
    s.theta1 = draw();
    s.theta2 = draw();
    s.dtheta1 = draw();
    s.dtheta2 = draw();
    return s;
}

Observation observe(const AcrobotState& s, Variant variant)
{
    if (variant == Variant::RawAngles) {
        return Eigen::Vector4d{s.theta1, s.theta2, s.dtheta1, s.dtheta2};
    }
    Observation y(6);
    y << std::sin(s.theta1), std::cos(s.theta1), std::sin(s.theta2), std::cos(s.theta2), s.dtheta1, s.dtheta2;
    return y;
}

}  // namespace acrobench
