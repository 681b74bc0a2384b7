#include "shardagg/grad/tensor.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "shardagg/errors.hpp"

namespace shardagg::grad {

std::int64_t params_for_mb(double mb) {
    if (!(mb >= 0.0)) {
        throw InvalidArgument("gradient size must be non-negative, got " + std::to_string(mb));
    }
    return static_cast<std::int64_t>(std::llround(mb * kBytesPerMB / kBytesPerParam));
}

double mb_for_params(std::int64_t params) {
    return static_cast<double>(params * kBytesPerParam) / kBytesPerMB;
}

GradientTensor GradientTensor::materialized(std::vector<float> values, std::uint64_t seed) {
    GradientTensor t;
    t.param_count_ = static_cast<std::int64_t>(values.size());
    t.storage_ = std::make_shared<const std::vector<float>>(std::move(values));
    t.seed_ = seed;
    return t;
}

GradientTensor GradientTensor::phantom(std::int64_t param_count) {
    if (param_count < 0) {
        throw InvalidArgument("param_count must be non-negative");
    }
    GradientTensor t;
    t.param_count_ = param_count;
    return t;
}

GradientTensor GradientTensor::phantom_mb(double mb) { return phantom(params_for_mb(mb)); }

GradientTensor GradientTensor::random_uniform(std::int64_t param_count, std::uint64_t seed) {
    if (param_count < 0) {
        throw InvalidArgument("param_count must be non-negative");
    }
    std::mt19937_64 engine(seed);
    std::vector<float> values(static_cast<std::size_t>(param_count));
    // 24 random mantissa bits -> exactly representable value in [0, 1).
    constexpr float kScale = 1.0f / 16777216.0f;
    for (auto& v : values) {
        const float unit = static_cast<float>(engine() >> 40) * kScale;
        v = 2.0f * unit - 1.0f;
    }
    return materialized(std::move(values), seed);
}

std::span<const float> GradientTensor::values() const {
    if (is_phantom()) {
        throw InvalidArgument("element access on a phantom tensor");
    }
    return std::span<const float>(storage_->data() + offset_, static_cast<std::size_t>(param_count_));
}

GradientTensor GradientTensor::slice(std::int64_t begin, std::int64_t end) const {
    if (begin < 0 || end < begin || end > param_count_) {
        throw InvalidArgument("slice [" + std::to_string(begin) + ", " + std::to_string(end) +
                              ") out of range for " + std::to_string(param_count_) + " params");
    }
    GradientTensor t;
    t.storage_ = storage_;
    t.offset_ = is_phantom() ? 0 : offset_ + begin;
    t.param_count_ = end - begin;
    t.seed_ = seed_;
    return t;
}

bool GradientTensor::bit_identical(const GradientTensor& other) const {
    if (param_count_ != other.param_count_ || is_phantom() != other.is_phantom()) {
        return false;
    }
    if (is_phantom()) {
        return true;
    }
    auto a = values();
    auto b = other.values();
    return std::memcmp(a.data(), b.data(), a.size_bytes()) == 0;
}

}  // namespace shardagg::grad
