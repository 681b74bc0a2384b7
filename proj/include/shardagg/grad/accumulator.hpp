#pragma once

#include <cstdint>
#include <vector>

#include "shardagg/grad/tensor.hpp"

namespace shardagg::grad {

// Un-normalized aggregate exchanged between tree levels: the weighted sum of
// the contributions and their total weight. Merging partials by weight keeps
// uneven groups exact.
struct PartialSum {
    GradientTensor sum;
    double weight = 0.0;
};

// Streaming FedAvg accumulator: one running sum plus one incoming shard at a
// time, so live gradient data never exceeds two buffers of `capacity`
// elements. The running sum is divided once, at finalize(), which keeps the
// per-coordinate summation order identical to fedavg_flat().
//
// Single owner; not safe for concurrent mutation.
class StreamingAccumulator {
public:
    StreamingAccumulator(std::int64_t capacity, bool phantom);

    // running_sum += weight * shard. Throws InvalidArgument on size or
    // payload-kind mismatch, or weight <= 0.
    void accumulate(const GradientTensor& shard, double weight = 1.0);

    // running_sum += partial.sum; weight_total += partial.weight.
    void merge(const PartialSum& partial);

    // running_sum / weight_total. Throws StateError when nothing was
    // accumulated or the accumulator was already consumed.
    GradientTensor finalize();

    // Hands out the running sum without dividing. Consumes the accumulator.
    PartialSum take_partial();

    std::int64_t capacity() const { return capacity_; }
    std::int64_t contributions() const { return contributions_; }
    double weight_total() const { return weight_total_; }
    bool is_phantom() const { return phantom_; }
    bool consumed() const { return consumed_; }

    // Largest number of gradient elements held at once (running sum plus the
    // incoming operand).
    std::int64_t peak_live_elements() const { return peak_live_; }

private:
    void check_operand(const GradientTensor& t) const;
    void check_open(const char* op) const;
    void add_scaled(std::span<const float> values, float scale);

    std::int64_t capacity_;
    bool phantom_;
    std::vector<float> running_sum_;
    std::int64_t contributions_ = 0;
    double weight_total_ = 0.0;
    std::int64_t peak_live_ = 0;
    bool consumed_ = false;
};

}  // namespace shardagg::grad
