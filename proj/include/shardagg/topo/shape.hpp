#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace shardagg::topo {

enum class Topology { GradsSharding, LambdaFL, LIFL };

std::string_view to_string(Topology t);
// Accepts "gradsharding"/"gradssharding", "lambdafl"/"lambda-fl", "lifl".
std::optional<Topology> parse_topology(std::string_view s);

struct TopologyKind {
    Topology family = Topology::GradsSharding;
    std::int64_t shards = 1;  // only meaningful for GradsSharding

    static TopologyKind grads_sharding(std::int64_t m) { return {Topology::GradsSharding, m}; }
    static TopologyKind lambda_fl() { return {Topology::LambdaFL, 1}; }
    static TopologyKind lifl() { return {Topology::LIFL, 1}; }

    std::string label() const;  // "gradsharding(M=4)", "lambdafl", "lifl"
    bool operator==(const TopologyKind&) const = default;
};

// Smallest r with r*r >= n, and smallest r with r*r*r >= n (exact integer
// arithmetic, no floating-point roots).
std::int64_t ceil_sqrt(std::int64_t n);
std::int64_t ceil_cbrt(std::int64_t n);

std::int64_t ceil_div(std::int64_t a, std::int64_t b);

// Tree dimensions for the client-partitioned topologies.
//   lambda-FL: k = max(2, ceil(sqrt N)), leaf_count = ceil(N / k)
//   LIFL:      b = ceil(cbrt N), l1 = ceil(N / b), l2 = ceil(l1 / b)
struct TreeShape {
    std::int64_t clients_per_leaf = 0;
    std::int64_t leaf_count = 0;
    std::int64_t branching = 0;
    std::int64_t l1_count = 0;
    std::int64_t l2_count = 0;
};

TreeShape lambdafl_shape(std::int64_t clients);
TreeShape lifl_shape(std::int64_t clients);

struct S3OpCounts {
    std::int64_t puts = 0;
    std::int64_t gets_agg = 0;
    std::int64_t gets_clients = 0;

    std::int64_t gets() const { return gets_agg + gets_clients; }
    std::int64_t total() const { return puts + gets(); }
    bool operator==(const S3OpCounts&) const = default;
};

// Closed-form per-round S3 operations, client uploads and read-back included.
//   GradsSharding: (NM + M, NM, NM)
//   lambda-FL:     (N + ceil(N/k) + 1, N + ceil(N/k), N)
//   LIFL:          (N + L1 + L2 + 1, N + L1 + L2, N)
S3OpCounts predicted_s3_ops(const TopologyKind& kind, std::int64_t clients);

// Number of aggregation functions per round.
std::int64_t aggregator_count(const TopologyKind& kind, std::int64_t clients);

}  // namespace shardagg::topo
