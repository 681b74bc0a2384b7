#pragma once

#include <cstdint>

namespace shardagg::faas {

// Function-platform ceilings and the empirical peak-memory model
// (multiplier x input + runtime overhead). Defaults are AWS Lambda's.
struct PlatformLimits {
    double min_memory_mb = 128.0;
    double max_memory_mb = 10240.0;
    double max_timeout_s = 900.0;
    double runtime_overhead_mb = 450.0;
    double streaming_multiplier = 3.0;

    // Throws InvalidArgument on non-positive values or min > max.
    void validate() const;
};

// multiplier * input_mb + overhead. `input_mb` is the size of one streamed
// input object (a full gradient for tree aggregators, a shard otherwise).
double estimate_peak_memory(double input_mb, const PlatformLimits& limits = {});

// Two float32 buffers of param_count / M elements, in MB.
double streaming_lower_bound(std::int64_t param_count, std::int64_t shard_count);

// Peak of an aggregator that loads all N inputs before averaging: N inputs
// plus the output buffer.
double collect_then_average_memory(double shard_mb, std::int64_t clients);

struct FeasibilityVerdict {
    bool feasible = false;
    double required_mb = 0.0;
    double utilization = 0.0;  // required / max_memory
};

FeasibilityVerdict check_feasibility(double gradient_mb, std::int64_t shard_count,
                                     const PlatformLimits& limits = {});

// Largest gradient (MB) a single full-gradient function can aggregate.
double full_gradient_threshold_mb(const PlatformLimits& limits = {});

// Smallest shard count that keeps one aggregator at or below
// `max_utilization` of the memory ceiling. Throws InvalidArgument if
// max_utilization is not in (0, 1] or the overhead alone exceeds the budget.
std::int64_t min_shards_for(double gradient_mb, const PlatformLimits& limits = {},
                            double max_utilization = 1.0);

// ceil(required), clamped to the platform memory range.
double auto_provision_mb(double required_mb, const PlatformLimits& limits = {});

// Time to fold `bytes` of input into a running sum.
double compute_time_model(std::int64_t bytes_processed, double compute_mbps);

}  // namespace shardagg::faas
