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

#ifndef ACROBENCH_TRACE_HPP
#define ACROBENCH_TRACE_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "acrobench/acrobot.hpp"

namespace acrobench {

/// Ordered log of (observable, action, reward) rows; `reward` is the reward of the
/// observable reached by taking `action`. Rows of one episode are contiguous with t = 0, 1, ...
class Trace {
public:
    explicit Trace(Variant variant = Variant::RawAngles) : variant_(variant) {}

    Variant variant() const noexcept { return variant_; }
    int dim() const noexcept { return observable_dim(variant_); }
    int size() const noexcept { return static_cast<int>(actions_.size()); }
    bool empty() const noexcept { return actions_.empty(); }

    void append(int episode, int t, const Observation& y, Action a, double r);
    void append(const Trace& other);

    Eigen::Map<const Eigen::MatrixXd> observations() const { return {obs_.data(), dim(), size()}; }
    Eigen::Map<const Eigen::VectorXd> observation(int row) const { return {obs_.data() + row * dim(), dim()}; }
    Action action(int row) const { return actions_[row]; }
    double reward(int row) const { return rewards_[row]; }
    int episode(int row) const { return episode_[row]; }
    int t(int row) const { return t_[row]; }

    /// [begin, end) row ranges of the episodes in order of appearance.
    std::vector<std::pair<int, int>> episode_ranges() const;
    int num_episodes() const { return static_cast<int>(episode_ranges().size()); }

    /// The episodes at the given positions of episode_ranges(), renumbered 0..k-1.
    Trace select_episodes(const std::vector<int>& positions) const;

    double mean_reward() const;

private:
    Variant variant_;
    std::vector<double> obs_;
    std::vector<Action> actions_;
    std::vector<double> rewards_;
    std::vector<int> episode_;
    std::vector<int> t_;
};

/// Conditioning of row `row`: featurize(y_row) followed by the torque applied there.
Condition condition_at(const Trace& trace, int row);

/// Consecutive within-episode pairs (y_t, a_t) -> y_{t+1}; never crosses an episode boundary.
struct TransitionSet {
    Eigen::MatrixXd conditions;  // kConditionDim x n
    Eigen::MatrixXd targets;     // d_y x n
    std::vector<int> rows;       // source row t of each pair

    int size() const noexcept { return static_cast<int>(conditions.cols()); }
};

TransitionSet transitions(const Trace& trace);

/// CSV with header episode,t,y1..y{d},a,r. `meta` is written as a leading "# " comment line.
void write_trace_csv(std::ostream& os, const Trace& trace, const std::string& meta = {});
void write_trace_csv(const std::string& path, const Trace& trace, const std::string& meta = {});

/// Parses write_trace_csv output; the variant is inferred from the column count.
/// Comment lines are returned through `meta` when non-null.
Trace read_trace_csv(std::istream& is, std::string* meta = nullptr);
Trace read_trace_csv(const std::string& path, std::string* meta = nullptr);

}  // namespace acrobench

#endif  // ACROBENCH_TRACE_HPP
