#include "shardagg/faas/platform.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "shardagg/errors.hpp"
#include "shardagg/grad/tensor.hpp"

namespace shardagg::faas {

void PlatformLimits::validate() const {
    if (!(min_memory_mb > 0.0) || !(max_memory_mb > 0.0) || min_memory_mb > max_memory_mb) {
        throw InvalidArgument(fmt::format("invalid memory range [{}, {}] MB", min_memory_mb, max_memory_mb));
    }
    if (!(max_timeout_s > 0.0)) throw InvalidArgument("max_timeout_s must be > 0");
    if (!(runtime_overhead_mb >= 0.0)) throw InvalidArgument("runtime_overhead_mb must be >= 0");
    if (!(streaming_multiplier > 0.0)) throw InvalidArgument("streaming_multiplier must be > 0");
}

double estimate_peak_memory(double input_mb, const PlatformLimits& limits) {
    if (!(input_mb >= 0.0)) {
        throw InvalidArgument("input size must be non-negative");
    }
    return limits.streaming_multiplier * input_mb + limits.runtime_overhead_mb;
}

double streaming_lower_bound(std::int64_t param_count, std::int64_t shard_count) {
    if (shard_count < 1) throw InvalidArgument("shard count must be >= 1");
    const double shard_params = static_cast<double>(param_count) / static_cast<double>(shard_count);
    return 2.0 * shard_params * grad::kBytesPerParam / grad::kBytesPerMB;
}

double collect_then_average_memory(double shard_mb, std::int64_t clients) {
    if (clients < 1) throw InvalidArgument("client count must be >= 1");
    return static_cast<double>(clients + 1) * shard_mb;
}

FeasibilityVerdict check_feasibility(double gradient_mb, std::int64_t shard_count,
                                     const PlatformLimits& limits) {
    if (shard_count < 1) throw InvalidArgument("shard count must be >= 1");
    FeasibilityVerdict v;
    v.required_mb = estimate_peak_memory(gradient_mb / static_cast<double>(shard_count), limits);
    v.feasible = v.required_mb <= limits.max_memory_mb;
    v.utilization = v.required_mb / limits.max_memory_mb;
    return v;
}

double full_gradient_threshold_mb(const PlatformLimits& limits) {
    return (limits.max_memory_mb - limits.runtime_overhead_mb) / limits.streaming_multiplier;
}

std::int64_t min_shards_for(double gradient_mb, const PlatformLimits& limits, double max_utilization) {
    if (!(max_utilization > 0.0 && max_utilization <= 1.0)) {
        throw InvalidArgument("max_utilization must be in (0, 1]");
    }
    const double budget = limits.max_memory_mb * max_utilization;
    const double per_shard = (budget - limits.runtime_overhead_mb) / limits.streaming_multiplier;
    if (!(per_shard > 0.0)) {
        throw InvalidArgument("runtime overhead alone exceeds the memory budget");
    }
    auto m = static_cast<std::int64_t>(std::ceil(gradient_mb / per_shard));
    m = std::max<std::int64_t>(m, 1);
    // Guard the ceil against rounding at the exact boundary.
    while (m > 1 && estimate_peak_memory(gradient_mb / static_cast<double>(m - 1), limits) <= budget) --m;
    while (estimate_peak_memory(gradient_mb / static_cast<double>(m), limits) > budget) ++m;
    return m;
}

double auto_provision_mb(double required_mb, const PlatformLimits& limits) {
    return std::clamp(std::ceil(required_mb), limits.min_memory_mb, limits.max_memory_mb);
}

double compute_time_model(std::int64_t bytes_processed, double compute_mbps) {
    if (!(compute_mbps > 0.0)) throw InvalidArgument("compute throughput must be > 0");
    return static_cast<double>(bytes_processed) / grad::kBytesPerMB / compute_mbps;
}

}  // namespace shardagg::faas
