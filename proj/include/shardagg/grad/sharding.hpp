#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shardagg/grad/tensor.hpp"

namespace shardagg::grad {

// Half-open coordinate range [begin, end).
struct IndexRange {
    std::int64_t begin = 0;
    std::int64_t end = 0;

    std::int64_t size() const { return end - begin; }
    bool contains(std::int64_t i) const { return i >= begin && i < end; }
    bool operator==(const IndexRange&) const = default;
};

// Splits [0, total) into `parts` contiguous ranges whose sizes differ by at
// most one; the first (total mod parts) ranges carry the extra element.
std::vector<IndexRange> balanced_ranges(std::int64_t total, std::int64_t parts);

class ShardPlan {
public:
    // Throws InvalidArgument if shard_count < 1 or total_params < 0.
    ShardPlan(std::int64_t total_params, std::int64_t shard_count);

    std::int64_t total_params() const { return total_params_; }
    std::int64_t shard_count() const { return static_cast<std::int64_t>(ranges_.size()); }
    const std::vector<IndexRange>& ranges() const { return ranges_; }
    const IndexRange& range(std::int64_t shard) const { return ranges_.at(static_cast<std::size_t>(shard)); }
    std::int64_t max_shard_params() const { return ranges_.front().size(); }

private:
    std::int64_t total_params_;
    std::vector<IndexRange> ranges_;
};

// Split into M contiguous shards following ShardPlan. A Materialized input
// requires M <= param_count.
std::vector<GradientTensor> shard(const GradientTensor& g, std::int64_t shard_count);

// Inverse of shard(): joins shards in order. All inputs must share a
// payload kind.
GradientTensor concat(std::span<const GradientTensor> shards);

}  // namespace shardagg::grad
