#include "shardagg/topo/plan.hpp"

#include <fmt/format.h>

#include "shardagg/errors.hpp"

namespace shardagg::topo {

using store::KeyPattern;
using store::KeyRole;
using store::ObjectKey;

std::int64_t RoundPlan::aggregator_count() const {
    std::int64_t n = 0;
    for (const auto& p : phases) n += static_cast<std::int64_t>(p.aggregators.size());
    return n;
}

namespace {

struct Builder {
    const GradientDescriptor& gradient;
    const faas::PlatformLimits& limits;
    const PlanOptions& options;

    AggregatorPlan make(std::string name, std::vector<ObjectKey> inputs, ObjectKey output, faas::OutputKind kind,
                        std::int64_t param_count, KeyPattern pattern) const {
        const double object_mb = grad::mb_for_params(param_count);
        const double required = faas::estimate_peak_memory(object_mb, limits);

        AggregatorPlan a;
        a.function.name = name;
        a.function.allocated_memory_mb =
            options.memory_override_mb ? *options.memory_override_mb : faas::auto_provision_mb(required, limits);
        a.function.timeout_s = options.timeout_s;
        a.function.input_bytes =
            static_cast<std::int64_t>(inputs.size()) * param_count * grad::kBytesPerParam;
        a.trigger = {std::move(pattern), static_cast<int>(inputs.size()), std::move(name)};
        a.task = {std::move(inputs), std::move(output), kind, param_count, gradient.phantom};
        return a;
    }
};

// One level of a client-partitioned tree: aggregator g reads members of
// `groups[g]` from `in_role` and writes one object of `out_role`.
PhasePlan tree_level(const Builder& b, int round, const std::string& phase, const std::string& prefix,
                     KeyRole in_role, KeyRole out_role, std::int64_t inputs, std::int64_t aggregators,
                     faas::OutputKind kind) {
    PhasePlan p{phase, {}};
    const auto groups = grad::balanced_ranges(inputs, aggregators);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<ObjectKey> keys;
        for (auto i = groups[g].begin; i < groups[g].end; ++i) {
            keys.push_back(in_role == KeyRole::ClientGradient ? ObjectKey::client_gradient(round, static_cast<int>(i))
                                                              : ObjectKey::partial(round, in_role, static_cast<int>(i)));
        }
        const ObjectKey out = out_role == KeyRole::RootResult ? ObjectKey::root_result(round)
                                                              : ObjectKey::partial(round, out_role, static_cast<int>(g));
        const std::string name = out_role == KeyRole::RootResult ? std::string("root") : fmt::format("{}-{}", prefix, g);
        p.aggregators.push_back(
            b.make(name, std::move(keys), out, kind, b.gradient.param_count, {round, in_role, std::nullopt, groups[g]}));
    }
    return p;
}

}  // namespace

RoundPlan plan(const TopologyKind& kind, std::int64_t clients, const GradientDescriptor& gradient,
               const faas::PlatformLimits& limits, const PlanOptions& options) {
    limits.validate();
    if (clients < 1) throw InvalidArgument(fmt::format("client count must be >= 1, got {}", clients));
    if (gradient.param_count < 1) throw InvalidArgument("gradient must have at least one parameter");
    if (kind.family == Topology::GradsSharding && (kind.shards < 1 || kind.shards > gradient.param_count)) {
        throw InvalidArgument(fmt::format("shard count {} outside [1, {}]", kind.shards, gradient.param_count));
    }
    if (options.round < 0) throw InvalidArgument("round must be non-negative");

    RoundPlan rp;
    rp.kind = kind;
    rp.clients = clients;
    rp.gradient = gradient;
    rp.round = options.round;
    const int r = options.round;
    const auto n = static_cast<int>(clients);
    const Builder b{gradient, limits, options};

    // Per-aggregator input object: a shard for GradsSharding, the full
    // gradient for tree topologies.
    std::int64_t object_params = gradient.param_count;
    if (kind.family == Topology::GradsSharding) {
        rp.shards.emplace(gradient.param_count, kind.shards);
        object_params = rp.shards->max_shard_params();
    }
    rp.verdict = faas::check_feasibility(grad::mb_for_params(object_params), 1, limits);
    if (!rp.verdict.feasible) {
        throw Infeasible(fmt::format("{} with a {:.1f} MB gradient needs {:.0f} MB per aggregator, limit is {:.0f} MB",
                                     kind.label(), gradient.size_mb(), rp.verdict.required_mb, limits.max_memory_mb),
                         rp.verdict.required_mb, limits.max_memory_mb);
    }

    rp.client_uploads.resize(static_cast<std::size_t>(clients));
    switch (kind.family) {
        case Topology::GradsSharding: {
            const auto m = static_cast<int>(kind.shards);
            PhasePlan p{"shard-aggregation", {}};
            for (int j = 0; j < m; ++j) {
                std::vector<ObjectKey> keys;
                for (int i = 0; i < n; ++i) keys.push_back(ObjectKey::client_shard(r, i, j));
                p.aggregators.push_back(b.make(fmt::format("shard-agg-{}", j), std::move(keys),
                                               ObjectKey::shard_result(r, j), faas::OutputKind::Mean,
                                               rp.shards->range(j).size(),
                                               {r, KeyRole::ClientShard, j, grad::IndexRange{0, clients}}));
                rp.readback.push_back(ObjectKey::shard_result(r, j));
            }
            rp.phases.push_back(std::move(p));
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < m; ++j) rp.client_uploads[static_cast<std::size_t>(i)].push_back(ObjectKey::client_shard(r, i, j));
            }
            break;
        }
        case Topology::LambdaFL: {
            rp.shape = lambdafl_shape(clients);
            const auto leaves = rp.shape.leaf_count;
            rp.phases.push_back(tree_level(b, r, "leaves", "leaf", KeyRole::ClientGradient, KeyRole::LeafPartial,
                                           clients, leaves, faas::OutputKind::PartialSum));
            rp.phases.push_back(tree_level(b, r, "root", "root", KeyRole::LeafPartial, KeyRole::RootResult, leaves, 1,
                                           faas::OutputKind::Mean));
            break;
        }
        case Topology::LIFL: {
            rp.shape = lifl_shape(clients);
            rp.phases.push_back(tree_level(b, r, "level1", "l1", KeyRole::ClientGradient, KeyRole::Level1Partial,
                                           clients, rp.shape.l1_count, faas::OutputKind::PartialSum));
            rp.phases.push_back(tree_level(b, r, "level2", "l2", KeyRole::Level1Partial, KeyRole::Level2Partial,
                                           rp.shape.l1_count, rp.shape.l2_count, faas::OutputKind::PartialSum));
            rp.phases.push_back(tree_level(b, r, "root", "root", KeyRole::Level2Partial, KeyRole::RootResult,
                                           rp.shape.l2_count, 1, faas::OutputKind::Mean));
            break;
        }
    }
    if (kind.family != Topology::GradsSharding) {
        for (int i = 0; i < n; ++i) rp.client_uploads[static_cast<std::size_t>(i)].push_back(ObjectKey::client_gradient(r, i));
        rp.readback.push_back(ObjectKey::root_result(r));
    }
    return rp;
}

}  // namespace shardagg::topo
