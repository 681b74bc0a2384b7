#include "shardagg/grad/sharding.hpp"

#include <string>

#include "shardagg/errors.hpp"

namespace shardagg::grad {

std::vector<IndexRange> balanced_ranges(std::int64_t total, std::int64_t parts) {
    if (parts < 1) {
        throw InvalidArgument("partition count must be >= 1, got " + std::to_string(parts));
    }
    if (total < 0) {
        throw InvalidArgument("partition total must be non-negative");
    }
    const std::int64_t base = total / parts;
    const std::int64_t extra = total % parts;
    std::vector<IndexRange> out;
    out.reserve(static_cast<std::size_t>(parts));
    std::int64_t start = 0;
    for (std::int64_t i = 0; i < parts; ++i) {
        const std::int64_t len = base + (i < extra ? 1 : 0);
        out.push_back({start, start + len});
        start += len;
    }
    return out;
}

ShardPlan::ShardPlan(std::int64_t total_params, std::int64_t shard_count)
    : total_params_(total_params), ranges_(balanced_ranges(total_params, shard_count)) {}

std::vector<GradientTensor> shard(const GradientTensor& g, std::int64_t shard_count) {
    if (shard_count < 1) {
        throw InvalidArgument("shard count must be >= 1, got " + std::to_string(shard_count));
    }
    if (g.is_materialized() && shard_count > g.param_count()) {
        throw InvalidArgument("shard count " + std::to_string(shard_count) + " exceeds " +
                              std::to_string(g.param_count()) + " materialized params");
    }
    const ShardPlan plan(g.param_count(), shard_count);
    std::vector<GradientTensor> out;
    out.reserve(static_cast<std::size_t>(shard_count));
    for (const auto& r : plan.ranges()) {
        out.push_back(g.slice(r.begin, r.end));
    }
    return out;
}

GradientTensor concat(std::span<const GradientTensor> shards) {
    if (shards.empty()) {
        throw InvalidArgument("concat of an empty shard list");
    }
    const bool phantom = shards.front().is_phantom();
    std::int64_t total = 0;
    for (const auto& s : shards) {
        if (s.is_phantom() != phantom) {
            throw InvalidArgument("concat of mixed phantom and materialized shards");
        }
        total += s.param_count();
    }
    if (shards.size() == 1) {
        return shards.front();
    }
    if (phantom) {
        return GradientTensor::phantom(total);
    }
    std::vector<float> joined;
    joined.reserve(static_cast<std::size_t>(total));
    for (const auto& s : shards) {
        auto v = s.values();
        joined.insert(joined.end(), v.begin(), v.end());
    }
    return GradientTensor::materialized(std::move(joined), shards.front().seed());
}

}  // namespace shardagg::grad
