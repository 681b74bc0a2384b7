#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shardagg/faas/executor.hpp"
#include "shardagg/grad/tensor.hpp"
#include "shardagg/store/object_store.hpp"
#include "shardagg/topo/plan.hpp"

namespace shardagg::topo {

// Read/compute/write seconds along the round's critical path: for each
// phase, the components of its slowest invocation, summed over phases.
struct TimeBreakdown {
    double read_s = 0.0;
    double compute_s = 0.0;
    double write_s = 0.0;
};

struct RoundMetrics {
    TopologyKind kind;
    std::int64_t clients = 0;
    GradientDescriptor gradient;

    // From the first aggregator start to the last result written. Client
    // upload and read-back are excluded.
    double wall_clock_s = 0.0;
    std::vector<faas::PhaseRecord> phases;
    store::StoreStats stats;  // full round trip, split by issuer
    S3OpCounts predicted;
    double billed_gb_seconds = 0.0;

    // Slowest client's sequential upload / read-back time.
    double client_upload_s = 0.0;
    double client_readback_s = 0.0;

    // What client 0 reconstructs at the end of the round.
    grad::GradientTensor result;

    TimeBreakdown critical_path() const;
    std::int64_t invocation_count() const;
    double peak_memory_estimate_mb() const;  // max over invocations
    double allocated_memory_mb() const;      // max over invocations
    std::int64_t measured_peak_live_bytes() const;
    double shard_mb() const;  // size of one aggregator input object
};

// Drives one round: client uploads, trigger-fired aggregation phases on the
// virtual clock, then client read-back. Phases are formed from the triggers
// the store fires, and each must match the plan's next phase.
//
// Throws InvalidArgument for a client list that does not fit the plan,
// OutOfMemory/Timeout/NotFound from the executor (with phase and function
// names), and InvariantViolation if the executed S3 operation counts differ
// from predicted_s3_ops().
RoundMetrics execute_round(const RoundPlan& plan, store::ObjectStore& store, faas::FunctionExecutor& executor,
                           std::span<const grad::GradientTensor> clients);

// Everything needed to run a round from scratch.
struct SimConfig {
    store::TransferModel transfer;
    faas::ExecutorConfig executor;
    PlanOptions plan;
    std::uint64_t seed = 42;
    // Gradients at or below this size get real element data.
    double materialize_threshold_mb = 64.0;

    bool materialize(double gradient_mb) const { return gradient_mb <= materialize_threshold_mb; }
};

// Client gradients for a round: seeded uniform(-1, 1) (client i uses
// seed + i) or phantoms.
std::vector<grad::GradientTensor> make_clients(std::int64_t clients, const GradientDescriptor& gradient,
                                               std::uint64_t seed);

// Plan + fresh store + fresh executor + generated clients.
RoundMetrics simulate_round(const TopologyKind& kind, std::int64_t clients, double gradient_mb,
                            const SimConfig& config);

struct GridPoint {
    TopologyKind kind;
    double gradient_mb = 0.0;
    std::string model;  // label only
};

struct SweepPoint {
    GridPoint point;
    std::int64_t clients = 0;
    std::optional<RoundMetrics> metrics;
    // Set when the point could not run: plan-time infeasibility, OOM or
    // timeout.
    std::optional<std::string> failure;
    double required_mb = 0.0;
    double limit_mb = 0.0;
    double utilization = 0.0;
    double speedup = 0.0;  // first point's wall clock / this one; 0 if n/a

    bool feasible() const { return metrics.has_value(); }
};

// One fresh round per grid point. Infeasible points are recorded, not
// thrown. Speedups are relative to the first grid point.
std::vector<SweepPoint> sweep(std::span<const GridPoint> grid, std::int64_t clients, const SimConfig& config);

}  // namespace shardagg::topo
