#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shardagg/faas/platform.hpp"
#include "shardagg/topo/shape.hpp"

namespace shardagg::topo {

// Outcome of one self-check suite run by `shardagg verify`.
struct SuiteResult {
    std::string name;
    std::int64_t cases = 0;
    std::vector<std::string> failures;

    bool passed() const { return failures.empty(); }
};

inline constexpr double kTreeRelativeTolerance = 1e-5;

// Every topology against fedavg_flat on small Materialized rounds:
// GradsSharding must be bit-identical, trees within kTreeRelativeTolerance.
SuiteResult verify_oracle_equivalence(std::int64_t max_clients = 12, std::int64_t max_shards = 5,
                                      std::int64_t param_count = 97, std::uint64_t seed = 7);

using OpPredictor = std::function<S3OpCounts(const TopologyKind&, std::int64_t)>;

// Executes phantom rounds over a grid of (topology, N, M) and compares the
// store's counters, split by issuer, against `predictor`. Failures name the
// offending topology/N/M triple.
SuiteResult verify_op_counts(const OpPredictor& predictor = predicted_s3_ops);

// Memory-model boundary: integer feasibility threshold, monotonicity in M,
// and the reference allocations for the published model sizes.
SuiteResult verify_feasibility_boundary(const faas::PlatformLimits& limits = {});

std::vector<SuiteResult> run_all_suites();

}  // namespace shardagg::topo
