#include "shardagg/econ/cost.hpp"

#include "shardagg/errors.hpp"

namespace shardagg::econ {

void PriceSheet::validate() const {
    if (!(lambda_gb_second >= 0.0) || !(s3_put >= 0.0) || !(s3_get >= 0.0)) {
        throw InvalidArgument("prices must be non-negative");
    }
}

double gb_seconds(double memory_mb, double seconds) { return memory_mb / 1024.0 * seconds; }

CostReport cost_of_usage(const Usage& usage, const PriceSheet& prices) {
    prices.validate();
    if (usage.gb_seconds < 0.0 || usage.puts < 0 || usage.gets < 0) {
        throw InvalidArgument("usage counters must be non-negative");
    }
    CostReport c;
    c.lambda_cost = usage.gb_seconds * prices.lambda_gb_second;
    c.s3_put_cost = static_cast<double>(usage.puts) * prices.s3_put;
    c.s3_get_cost = static_cast<double>(usage.gets) * prices.s3_get;
    c.s3_cost = c.s3_put_cost + c.s3_get_cost;
    c.total = c.lambda_cost + c.s3_cost;
    c.per_1k_rounds = 1000.0 * c.total;
    return c;
}

CostReport cost_of_round(const topo::RoundMetrics& metrics, const PriceSheet& prices) {
    return cost_of_usage({metrics.billed_gb_seconds, metrics.stats.puts, metrics.stats.gets}, prices);
}

IdleReport idle_ratio(double t_train_ms, double t_agg_ms) {
    if (t_train_ms < 0.0 || t_agg_ms < 0.0) throw InvalidArgument("round times must be non-negative");
    if (t_train_ms == 0.0 && t_agg_ms == 0.0) throw InvalidArgument("training and aggregation times are both zero");
    return {t_train_ms, t_agg_ms, t_train_ms / (t_train_ms + t_agg_ms)};
}

double feasibility_threshold(const faas::PlatformLimits& limits) {
    if (!(limits.streaming_multiplier > 0.0)) throw InvalidArgument("streaming multiplier must be > 0");
    return faas::full_gradient_threshold_mb(limits);
}

}  // namespace shardagg::econ
