#include "shardagg/topo/shape.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "shardagg/errors.hpp"

namespace shardagg::topo {

std::string_view to_string(Topology t) {
    switch (t) {
        case Topology::GradsSharding: return "gradsharding";
        case Topology::LambdaFL: return "lambdafl";
        case Topology::LIFL: return "lifl";
    }
    return "unknown";
}

std::optional<Topology> parse_topology(std::string_view s) {
    if (s == "gradsharding" || s == "gradssharding") return Topology::GradsSharding;
    if (s == "lambdafl" || s == "lambda-fl") return Topology::LambdaFL;
    if (s == "lifl") return Topology::LIFL;
    return std::nullopt;
}

std::string TopologyKind::label() const {
    if (family == Topology::GradsSharding) return fmt::format("gradsharding(M={})", shards);
    return std::string(to_string(family));
}

std::int64_t ceil_sqrt(std::int64_t n) {
    if (n < 0) throw InvalidArgument("ceil_sqrt of a negative number");
    std::int64_t r = 0;
    while (r * r < n) ++r;
    return r;
}

std::int64_t ceil_cbrt(std::int64_t n) {
    if (n < 0) throw InvalidArgument("ceil_cbrt of a negative number");
    std::int64_t r = 0;
    while (r * r * r < n) ++r;
    return r;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

namespace {

void require_clients(std::int64_t clients) {
    if (clients < 1) throw InvalidArgument(fmt::format("client count must be >= 1, got {}", clients));
}

}  // namespace

TreeShape lambdafl_shape(std::int64_t clients) {
    require_clients(clients);
    TreeShape s;
    s.clients_per_leaf = std::max<std::int64_t>(2, ceil_sqrt(clients));
    s.leaf_count = ceil_div(clients, s.clients_per_leaf);
    return s;
}

TreeShape lifl_shape(std::int64_t clients) {
    require_clients(clients);
    TreeShape s;
    s.branching = ceil_cbrt(clients);
    s.l1_count = ceil_div(clients, s.branching);
    s.l2_count = ceil_div(s.l1_count, s.branching);
    return s;
}

S3OpCounts predicted_s3_ops(const TopologyKind& kind, std::int64_t clients) {
    require_clients(clients);
    const std::int64_t n = clients;
    switch (kind.family) {
        case Topology::GradsSharding: {
            if (kind.shards < 1) throw InvalidArgument("shard count must be >= 1");
            const std::int64_t m = kind.shards;
            return {n * m + m, n * m, n * m};
        }
        case Topology::LambdaFL: {
            const auto s = lambdafl_shape(n);
            return {n + s.leaf_count + 1, n + s.leaf_count, n};
        }
        case Topology::LIFL: {
            const auto s = lifl_shape(n);
            return {n + s.l1_count + s.l2_count + 1, n + s.l1_count + s.l2_count, n};
        }
    }
    throw InvalidArgument("unknown topology");
}

std::int64_t aggregator_count(const TopologyKind& kind, std::int64_t clients) {
    switch (kind.family) {
        case Topology::GradsSharding: return kind.shards;
        case Topology::LambdaFL: return lambdafl_shape(clients).leaf_count + 1;
        case Topology::LIFL: {
            const auto s = lifl_shape(clients);
            return s.l1_count + s.l2_count + 1;
        }
    }
    return 0;
}

}  // namespace shardagg::topo
