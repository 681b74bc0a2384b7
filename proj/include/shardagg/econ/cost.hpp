#pragma once

#include <cstdint>

#include "shardagg/faas/platform.hpp"
#include "shardagg/topo/round.hpp"

namespace shardagg::econ {

// Defaults: AWS us-east-1 Lambda and S3 Standard request pricing.
struct PriceSheet {
    double lambda_gb_second = 0.0000166667;
    double s3_put = 0.005 / 1000.0;
    double s3_get = 0.0004 / 1000.0;

    void validate() const;  // all prices >= 0
};

struct CostReport {
    double lambda_cost = 0.0;
    double s3_put_cost = 0.0;
    double s3_get_cost = 0.0;
    double s3_cost = 0.0;
    double total = 0.0;
    double per_1k_rounds = 0.0;
};

// Billable usage of one round.
struct Usage {
    double gb_seconds = 0.0;
    std::int64_t puts = 0;
    std::int64_t gets = 0;
};

// Allocated memory (1 GB = 1024 MB) times billed seconds.
double gb_seconds(double memory_mb, double seconds);

CostReport cost_of_usage(const Usage& usage, const PriceSheet& prices = {});

// Lambda GB-s of every invocation plus every S3 request of the round trip
// (client uploads, aggregator traffic and client read-back).
CostReport cost_of_round(const topo::RoundMetrics& metrics, const PriceSheet& prices = {});

struct IdleReport {
    double t_train_ms = 0.0;
    double t_agg_ms = 0.0;
    double idle_ratio = 0.0;  // t_train / (t_train + t_agg)
};

// Throws InvalidArgument for negative inputs or when both are zero.
IdleReport idle_ratio(double t_train_ms, double t_agg_ms);

// (max_memory - overhead) / multiplier: the largest full gradient one
// function can stream.
double feasibility_threshold(const faas::PlatformLimits& limits = {});

}  // namespace shardagg::econ
