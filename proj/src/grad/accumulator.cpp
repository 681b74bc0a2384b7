#include "shardagg/grad/accumulator.hpp"

#include <algorithm>
#include <string>

#include "shardagg/errors.hpp"

namespace shardagg::grad {

StreamingAccumulator::StreamingAccumulator(std::int64_t capacity, bool phantom)
    : capacity_(capacity), phantom_(phantom) {
    if (capacity < 0) {
        throw InvalidArgument("accumulator capacity must be non-negative");
    }
    if (!phantom_) {
        running_sum_.assign(static_cast<std::size_t>(capacity), 0.0f);
    }
    peak_live_ = capacity_;
}

void StreamingAccumulator::check_open(const char* op) const {
    if (consumed_) {
        throw StateError(std::string(op) + " on a finalized accumulator");
    }
}

void StreamingAccumulator::check_operand(const GradientTensor& t) const {
    if (t.param_count() != capacity_) {
        throw InvalidArgument("operand has " + std::to_string(t.param_count()) +
                              " params, accumulator capacity is " + std::to_string(capacity_));
    }
    if (t.is_phantom() != phantom_) {
        throw InvalidArgument(phantom_ ? "materialized operand on a phantom accumulator"
                                       : "phantom operand on a materialized accumulator");
    }
}

void StreamingAccumulator::add_scaled(std::span<const float> values, float scale) {
    if (scale == 1.0f) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            running_sum_[i] += values[i];
        }
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            running_sum_[i] += scale * values[i];
        }
    }
}

void StreamingAccumulator::accumulate(const GradientTensor& shard, double weight) {
    check_open("accumulate");
    if (!(weight > 0.0)) {
        throw InvalidArgument("accumulate weight must be positive");
    }
    check_operand(shard);
    peak_live_ = std::max(peak_live_, capacity_ + shard.param_count());
    if (!phantom_) {
        add_scaled(shard.values(), static_cast<float>(weight));
    }
    ++contributions_;
    weight_total_ += weight;
}

void StreamingAccumulator::merge(const PartialSum& partial) {
    check_open("merge");
    if (!(partial.weight > 0.0)) {
        throw InvalidArgument("partial weight must be positive");
    }
    check_operand(partial.sum);
    peak_live_ = std::max(peak_live_, capacity_ + partial.sum.param_count());
    if (!phantom_) {
        add_scaled(partial.sum.values(), 1.0f);
    }
    ++contributions_;
    weight_total_ += partial.weight;
}

GradientTensor StreamingAccumulator::finalize() {
    check_open("finalize");
    if (contributions_ == 0) {
        throw StateError("finalize on an empty accumulator");
    }
    consumed_ = true;
    if (phantom_) {
        return GradientTensor::phantom(capacity_);
    }
    // Divide in place so the result reuses the running-sum buffer.
    const float denom = static_cast<float>(weight_total_);
    for (auto& v : running_sum_) {
        v /= denom;
    }
    return GradientTensor::materialized(std::move(running_sum_));
}

PartialSum StreamingAccumulator::take_partial() {
    check_open("take_partial");
    if (contributions_ == 0) {
        throw StateError("take_partial on an empty accumulator");
    }
    consumed_ = true;
    if (phantom_) {
        return {GradientTensor::phantom(capacity_), weight_total_};
    }
    return {GradientTensor::materialized(std::move(running_sum_)), weight_total_};
}

}  // namespace shardagg::grad
