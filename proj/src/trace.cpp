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

#include "acrobench/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace acrobench {

void Trace::append(int episode, int t, const Observation& y, Action a, double r)
{
    if (y.size() != dim()) {
        throw std::invalid_argument("Trace::append: observable has wrong dimension");
    }
    obs_.insert(obs_.end(), y.data(), y.data() + y.size());
    actions_.push_back(a);
    rewards_.push_back(r);
    episode_.push_back(episode);
    t_.push_back(t);
}

void Trace::append(const Trace& other)
{
    if (other.variant_ != variant_) {
        throw std::invalid_argument("Trace::append: variant mismatch");
    }
    obs_.insert(obs_.end(), other.obs_.begin(), other.obs_.end());
    actions_.insert(actions_.end(), other.actions_.begin(), other.actions_.end());
    rewards_.insert(rewards_.end(), other.rewards_.begin(), other.rewards_.end());
    episode_.insert(episode_.end(), other.episode_.begin(), other.episode_.end());
    t_.insert(t_.end(), other.t_.begin(), other.t_.end());
}

std::vector<std::pair<int, int>> Trace::episode_ranges() const
{
    std::vector<std::pair<int, int>> out;
    int begin = 0;
    for (int r = 1; r <= size(); ++r) {
        if (r == size() || episode_[r] != episode_[r - 1] || t_[r] != t_[r - 1] + 1) {
            out.emplace_back(begin, r);
            begin = r;
        }
    }
    return out;
}

Trace Trace::select_episodes(const std::vector<int>& positions) const
{
    const auto ranges = episode_ranges();
    Trace out(variant_);
    int k = 0;
    for (int p : positions) {
        const auto [b, e] = ranges.at(p);
        for (int r = b; r < e; ++r) {
            out.append(k, r - b, observation(r), actions_[r], rewards_[r]);
        }
        ++k;
    }
    return out;
}

double Trace::mean_reward() const
{
    if (rewards_.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double r : rewards_) {
        s += r;
    }
    return s / static_cast<double>(rewards_.size());
}

Condition condition_at(const Trace& trace, int row)
{
    return make_condition(featurize(trace.observation(row), trace.variant()), trace.action(row));
}

TransitionSet transitions(const Trace& trace)
{
    std::vector<int> rows;
    for (const auto& [b, e] : trace.episode_ranges()) {
        for (int r = b; r + 1 < e; ++r) {
            rows.push_back(r);
        }
    }
    TransitionSet ts;
    ts.conditions.resize(kConditionDim, static_cast<Eigen::Index>(rows.size()));
    ts.targets.resize(trace.dim(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ts.conditions.col(i) = condition_at(trace, rows[i]);
        ts.targets.col(i) = trace.observation(rows[i] + 1);
    }
    ts.rows = std::move(rows);
    return ts;
}

void write_trace_csv(std::ostream& os, const Trace& trace, const std::string& meta)
{
    if (!meta.empty()) {
        os << "# " << meta << '\n';
    }
    os << "episode,t";
    for (int j = 1; j <= trace.dim(); ++j) {
        os << ",y" << j;
    }
    os << ",a,r\n";
    for (int r = 0; r < trace.size(); ++r) {
        os << trace.episode(r) << ',' << trace.t(r);
        const auto y = trace.observation(r);
        for (int j = 0; j < trace.dim(); ++j) {
            os << ',' << fmt::format("{:.17g}", y(j));
        }
        os << ',' << static_cast<int>(trace.action(r)) << ',' << fmt::format("{:.17g}", trace.reward(r)) << '\n';
    }
}

void write_trace_csv(const std::string& path, const Trace& trace, const std::string& meta)
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_trace_csv(os, trace, meta);
    if (!os) {
        throw std::runtime_error("write failed: " + path);
    }
}

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

double parse_double(const std::string& s)
{
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) {
        throw std::runtime_error("bad number in trace: " + s);
    }
    return v;
}

}  // namespace

Trace read_trace_csv(std::istream& is, std::string* meta)
{
    std::string line;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        if (line.rfind('#', 0) == 0) {
            if (meta != nullptr) {
                *meta += line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
            }
            continue;
        }
        header = split_csv(line);
        break;
    }
    const int d = static_cast<int>(header.size()) - 4;
    if (header.size() < 4 || header[0] != "episode" || header[1] != "t" || (d != 4 && d != 6)
        || header[header.size() - 2] != "a" || header.back() != "r") {
        throw std::runtime_error("not a trace file: unexpected header");
    }
    for (int j = 1; j <= d; ++j) {
        if (header[1 + j] != "y" + std::to_string(j)) {
            throw std::runtime_error("not a trace file: unexpected column " + header[1 + j]);
        }
    }
    Trace trace(d == 4 ? Variant::RawAngles : Variant::SinCos);
    Observation y(d);
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto cells = split_csv(line);
        if (static_cast<int>(cells.size()) != d + 4) {
            throw std::runtime_error("trace row has wrong number of columns: " + line);
        }
        for (int j = 0; j < d; ++j) {
            y(j) = parse_double(cells[2 + j]);
        }
        trace.append(std::stoi(cells[0]), std::stoi(cells[1]), y, action_from_int(std::stoi(cells[d + 2])),
                     parse_double(cells[d + 3]));
    }
    return trace;
}

Trace read_trace_csv(const std::string& path, std::string* meta)
{
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_trace_csv(is, meta);
}

}  // namespace acrobench
