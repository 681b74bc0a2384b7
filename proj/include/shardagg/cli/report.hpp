#pragma once

#include <array>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shardagg/cli/config.hpp"
#include "shardagg/econ/cost.hpp"
#include "shardagg/topo/round.hpp"

namespace shardagg::cli {

// Column order of the sweep CSV. Downstream plotting reads these by name
// and position; append only.
inline constexpr std::array<std::string_view, 17> kCsvColumns{
    "topology", "N",         "M",       "model",       "shard_mb",    "s3_read_s",   "compute_s",
    "s3_write_s", "wall_clock_s", "speedup_vs_first", "puts", "gets", "lambda_cost", "s3_cost",
    "cost_per_1k", "peak_mem_mb", "feasible"};

struct CsvRow {
    std::string topology;
    std::int64_t clients = 0;
    std::int64_t shards = 1;
    std::string model;
    double shard_mb = 0.0;
    bool feasible = false;
    double peak_mem_mb = 0.0;
    // Empty for infeasible rows.
    std::optional<topo::TimeBreakdown> breakdown;
    std::optional<double> wall_clock_s;
    std::optional<double> speedup_vs_first;
    std::optional<std::int64_t> puts;
    std::optional<std::int64_t> gets;
    std::optional<econ::CostReport> cost;
};

std::string csv_header();
std::string format_csv_row(const CsvRow& row);

CsvRow csv_row(const topo::SweepPoint& point, const econ::PriceSheet& prices);

// Mean of per-repetition sweeps over the same grid. Timing, memory and cost
// fields are averaged; op counts must agree across repetitions.
std::vector<CsvRow> csv_rows(const std::vector<std::vector<topo::SweepPoint>>& repetitions,
                             const econ::PriceSheet& prices);

// Results up to this many elements are embedded in the JSON record.
inline constexpr std::int64_t kMaxInlineResultValues = 4096;

nlohmann::json metrics_to_json(const topo::RoundMetrics& m, const econ::PriceSheet& prices);

struct InfeasibleRecord {
    std::string topology;
    std::int64_t clients = 0;
    std::int64_t shards = 1;
    std::string model;
    double gradient_mb = 0.0;
    double required_mb = 0.0;
    double limit_mb = 0.0;
    std::string reason;
};

nlohmann::json infeasible_to_json(const InfeasibleRecord& r);

// Fixed-width summary printed by `simulate`.
std::string human_table(const topo::RoundMetrics& m, const econ::CostReport& cost);

struct IdleRow {
    std::string model;
    double t_train_ms = 0.0;
    double t_agg_ms = 0.0;
};

// CSV with header "model,t_train_ms,t_agg_ms". Throws ConfigError naming
// the line on malformed input.
std::vector<IdleRow> parse_idle_table(std::istream& in);

}  // namespace shardagg::cli
