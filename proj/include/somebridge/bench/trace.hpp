// Copyright 2026 The somebridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOMEBRIDGE_BENCH_TRACE_HPP
#define SOMEBRIDGE_BENCH_TRACE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <vector>

#include "somebridge/bridge/route.hpp"

namespace somebridge::bench {

/// The four measurement checkpoints of one message through the pipeline,
/// all on one monotonic clock:
///   t1 before / t2 after the outbound conversion (bus encoding in, SOME/IP
///   payload out), t3 before / t4 after the inbound conversion back.
/// t3 - t2 is everything in between: serialization, the UDP hop, receive
/// dispatch. That span is the communication cost the conversion overhead is
/// judged against.
struct checkpoint {
    std::uint64_t msg_id = 0;
    time_point t1 = 0;
    time_point t2 = 0;
    time_point t3 = 0;
    time_point t4 = 0;
    std::size_t payload_bytes = 0; // SOME/IP payload size
};

/// Fixed-capacity trace sink shared by the sending and receiving routes of
/// one pipeline. Each side appends to its own preallocated array, so the
/// data path never allocates; records past capacity are counted and thrown
/// away rather than blocking. The routes stamp their timestamps before
/// calling in, so the lock taken here is outside every measured span.
class capture_sink final : public bridge::trace_sink {
public:
    explicit capture_sink(std::size_t capacity) {
        out_.reserve(capacity);
        in_.reserve(capacity);
    }

    void convert_out(std::uint64_t msg_id, time_point t1, time_point t2,
                     std::size_t payload_bytes) noexcept override {
        std::lock_guard lk(m_);
        if (out_.size() == out_.capacity()) {
            ++out_overflow_;
            return;
        }
        out_.push_back({msg_id, t1, t2, payload_bytes});
    }

    void convert_in(std::uint64_t msg_id, time_point t3, time_point t4,
                    std::size_t payload_bytes) noexcept override {
        std::lock_guard lk(m_);
        if (in_.size() == in_.capacity()) {
            ++in_overflow_;
            return;
        }
        in_.push_back({msg_id, t3, t4, payload_bytes});
    }

    void clear() {
        std::lock_guard lk(m_);
        out_.clear();
        in_.clear();
        out_overflow_ = in_overflow_ = 0;
    }

    std::uint64_t out_overflow() const {
        std::lock_guard lk(m_);
        return out_overflow_;
    }
    std::uint64_t in_overflow() const {
        std::lock_guard lk(m_);
        return in_overflow_;
    }
    std::size_t out_count() const {
        std::lock_guard lk(m_);
        return out_.size();
    }
    std::size_t in_count() const {
        std::lock_guard lk(m_);
        return in_.size();
    }

    /// Joins both halves on the message id. Both sides record in send order
    /// and the inbound side is a subsequence of the outbound side, so one
    /// forward scan pairs them. Outbound records left unmatched are messages
    /// the receiver never converted; out_count() - paired().size() is the
    /// loss count.
    std::vector<checkpoint> paired() const {
        std::lock_guard lk(m_);
        std::vector<checkpoint> res;
        res.reserve(in_.size());
        std::size_t scan = 0;
        for (const auto& i : in_) {
            while (scan < out_.size() && out_[scan].id != i.id) ++scan;
            if (scan == out_.size()) break;
            const auto& o = out_[scan++];
            res.push_back({o.id, o.a, o.b, i.a, i.b, o.bytes});
        }
        return res;
    }

private:
    struct rec {
        std::uint64_t id;
        time_point a, b;
        std::size_t bytes;
    };

    mutable std::mutex m_;
    std::vector<rec> out_;
    std::vector<rec> in_;
    std::uint64_t out_overflow_ = 0;
    std::uint64_t in_overflow_ = 0;
};

/// Five-number summary of one span population, in nanoseconds.
struct latency_stats {
    duration_ns min = 0;
    duration_ns q1 = 0;
    duration_ns median = 0;
    duration_ns q3 = 0;
    duration_ns max = 0;
    std::size_t count = 0;
};

/// Quantiles by linear interpolation over the sorted samples. The input is
/// taken by value because it has to be sorted anyway.
inline result<latency_stats> compute_stats(std::vector<duration_ns> samples) {
    if (samples.empty())
        return {errc::insufficient_samples, "no samples to summarize"};
    std::sort(samples.begin(), samples.end());
    auto quantile = [&](double p) -> duration_ns {
        if (samples.size() == 1) return samples[0];
        double idx = p * double(samples.size() - 1);
        auto lo = static_cast<std::size_t>(idx);
        double frac = idx - double(lo);
        if (lo + 1 == samples.size()) return samples[lo];
        return samples[lo] +
               static_cast<duration_ns>(std::llround(frac * double(samples[lo + 1] - samples[lo])));
    };
    latency_stats s;
    s.min = samples.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.max = samples.back();
    s.count = samples.size();
    return s;
}

/// Five-number summary of a dimensionless ratio population.
struct ratio_stats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

inline result<ratio_stats> compute_ratio_stats(std::vector<double> samples) {
    if (samples.empty())
        return {errc::insufficient_samples, "no ratios to summarize"};
    std::sort(samples.begin(), samples.end());
    auto quantile = [&](double p) -> double {
        if (samples.size() == 1) return samples[0];
        double idx = p * double(samples.size() - 1);
        auto lo = static_cast<std::size_t>(idx);
        if (lo + 1 == samples.size()) return samples[lo];
        return samples[lo] + (idx - double(lo)) * (samples[lo + 1] - samples[lo]);
    };
    ratio_stats s;
    s.min = samples.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.max = samples.back();
    s.count = samples.size();
    return s;
}

/// The three spans of a checkpoint population plus the per-message ratios of
/// conversion to communication time, (t2-t1)/(t3-t2) outbound and
/// (t4-t3)/(t3-t2) inbound, each summarized as quartiles.
struct span_set {
    latency_stats convert_out;   // t2 - t1
    latency_stats convert_in;    // t4 - t3
    latency_stats communication; // t3 - t2
    ratio_stats ratio_out;
    ratio_stats ratio_in;
};

inline result<span_set> analyze(const std::vector<checkpoint>& cps) {
    std::vector<duration_ns> conv_out, conv_in, comm;
    std::vector<double> r_out, r_in;
    conv_out.reserve(cps.size());
    conv_in.reserve(cps.size());
    comm.reserve(cps.size());
    r_out.reserve(cps.size());
    r_in.reserve(cps.size());
    for (const auto& c : cps) {
        conv_out.push_back(c.t2 - c.t1);
        conv_in.push_back(c.t4 - c.t3);
        comm.push_back(c.t3 - c.t2);
        if (c.t3 > c.t2) {
            r_out.push_back(double(c.t2 - c.t1) / double(c.t3 - c.t2));
            r_in.push_back(double(c.t4 - c.t3) / double(c.t3 - c.t2));
        }
    }
    auto a = compute_stats(std::move(conv_out));
    if (!a) return a.err();
    auto b = compute_stats(std::move(conv_in));
    if (!b) return b.err();
    auto c = compute_stats(std::move(comm));
    if (!c) return c.err();
    auto ro = compute_ratio_stats(std::move(r_out));
    if (!ro) return ro.err();
    auto ri = compute_ratio_stats(std::move(r_in));
    if (!ri) return ri.err();
    span_set s;
    s.convert_out = *a;
    s.convert_in = *b;
    s.communication = *c;
    s.ratio_out = *ro;
    s.ratio_in = *ri;
    return s;
}

} // namespace somebridge::bench

#endif // SOMEBRIDGE_BENCH_TRACE_HPP
