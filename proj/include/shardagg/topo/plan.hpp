#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shardagg/faas/executor.hpp"
#include "shardagg/faas/platform.hpp"
#include "shardagg/grad/sharding.hpp"
#include "shardagg/store/object_store.hpp"
#include "shardagg/topo/shape.hpp"

namespace shardagg::topo {

// Size and payload kind of the per-client gradient a round aggregates.
struct GradientDescriptor {
    std::int64_t param_count = 0;
    bool phantom = true;

    static GradientDescriptor from_mb(double mb, bool phantom) { return {grad::params_for_mb(mb), phantom}; }
    double size_mb() const { return grad::mb_for_params(param_count); }
};

struct PlanOptions {
    int round = 0;
    double timeout_s = 900.0;
    // Fixed allocation for every aggregator instead of auto-provisioning.
    std::optional<double> memory_override_mb;
};

struct AggregatorPlan {
    faas::FunctionSpec function;
    faas::AggregationTask task;
    store::Trigger trigger;  // fires when every input exists
};

struct PhasePlan {
    std::string name;
    std::vector<AggregatorPlan> aggregators;
};

// Immutable description of one aggregation round: which functions run in
// which phase, what they read and write, and what clients upload and read
// back.
struct RoundPlan {
    TopologyKind kind;
    std::int64_t clients = 0;
    GradientDescriptor gradient;
    TreeShape shape;
    std::optional<grad::ShardPlan> shards;
    int round = 0;
    faas::FeasibilityVerdict verdict;
    std::vector<PhasePlan> phases;
    std::vector<std::vector<store::ObjectKey>> client_uploads;  // per client
    std::vector<store::ObjectKey> readback;                     // same for every client

    std::int64_t aggregator_count() const;
};

// Builds the round plan. Tree clients are split into contiguous groups of
// balanced size (the first groups take the remainder).
//
// Throws Infeasible when an aggregator cannot fit the platform's memory
// ceiling, InvalidArgument on bad shape parameters (N < 1, M < 1, or
// M > param_count).
RoundPlan plan(const TopologyKind& kind, std::int64_t clients, const GradientDescriptor& gradient,
               const faas::PlatformLimits& limits = {}, const PlanOptions& options = {});

}  // namespace shardagg::topo
