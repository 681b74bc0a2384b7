#include "shardagg/topo/verify.hpp"

#include <cmath>

#include <fmt/format.h>

#include "shardagg/errors.hpp"
#include "shardagg/grad/fedavg.hpp"
#include "shardagg/topo/round.hpp"

namespace shardagg::topo {

namespace {

RoundMetrics run_materialized(const TopologyKind& kind, const std::vector<grad::GradientTensor>& clients) {
    const GradientDescriptor g{clients.front().param_count(), false};
    const auto rp = plan(kind, static_cast<std::int64_t>(clients.size()), g);
    store::ObjectStore store;
    faas::FunctionExecutor exec(store, {});
    return execute_round(rp, store, exec, clients);
}

}  // namespace

SuiteResult verify_oracle_equivalence(std::int64_t max_clients, std::int64_t max_shards, std::int64_t param_count,
                                      std::uint64_t seed) {
    SuiteResult s{"oracle-equivalence", 0, {}};
    for (std::int64_t n = 1; n <= max_clients; ++n) {
        const auto clients = make_clients(n, {param_count, false}, seed + static_cast<std::uint64_t>(n) * 1000);
        const auto reference = grad::fedavg_flat(clients);
        try {
            for (std::int64_t m = 1; m <= max_shards; ++m) {
                ++s.cases;
                const auto r = run_materialized(TopologyKind::grads_sharding(m), clients);
                if (!r.result.bit_identical(reference)) {
                    s.failures.push_back(fmt::format("gradsharding N={} M={}: result not bit-identical to flat FedAvg", n, m));
                }
            }
            for (const auto& kind : {TopologyKind::lambda_fl(), TopologyKind::lifl()}) {
                ++s.cases;
                const auto r = run_materialized(kind, clients);
                const double err = grad::max_relative_error(r.result, reference, clients);
                if (!(err <= kTreeRelativeTolerance)) {
                    s.failures.push_back(fmt::format("{} N={}: relative error {:.3g} > {:g}", kind.label(), n, err,
                                                     kTreeRelativeTolerance));
                }
            }
        } catch (const Error& e) {
            s.failures.push_back(fmt::format("N={}: {}", n, e.what()));
        }
    }
    return s;
}

SuiteResult verify_op_counts(const OpPredictor& predictor) {
    SuiteResult s{"op-counts", 0, {}};
    std::vector<TopologyKind> kinds{TopologyKind::lambda_fl(), TopologyKind::lifl()};
    for (std::int64_t m : {1, 2, 3, 4, 8, 16}) kinds.push_back(TopologyKind::grads_sharding(m));

    for (std::int64_t n : {1, 2, 3, 5, 7, 8, 9, 16, 20, 27, 28, 64}) {
        for (const auto& kind : kinds) {
            ++s.cases;
            const std::string where = fmt::format("{} N={} M={}", to_string(kind.family), n, kind.shards);
            try {
                const auto rp = plan(kind, n, {64, true});
                store::ObjectStore store;
                faas::FunctionExecutor exec(store, {});
                const auto clients = make_clients(n, rp.gradient, 0);
                const auto r = execute_round(rp, store, exec, clients);
                const S3OpCounts executed{r.stats.puts, r.stats.gets_from(store::Issuer::Aggregator),
                                          r.stats.gets_from(store::Issuer::ClientReadback)};
                const auto expected = predictor(kind, n);
                if (executed != expected) {
                    s.failures.push_back(fmt::format("{}: executed {}/{}/{} (puts/agg gets/client gets), predicted {}/{}/{}",
                                                     where, executed.puts, executed.gets_agg, executed.gets_clients,
                                                     expected.puts, expected.gets_agg, expected.gets_clients));
                }
            } catch (const Error& e) {
                s.failures.push_back(fmt::format("{}: {}", where, e.what()));
            }
        }
    }
    return s;
}

SuiteResult verify_feasibility_boundary(const faas::PlatformLimits& limits) {
    SuiteResult s{"feasibility-boundary", 0, {}};
    auto check = [&](bool ok, const std::string& what) {
        ++s.cases;
        if (!ok) s.failures.push_back(what);
    };

    const auto largest = static_cast<std::int64_t>(std::floor(faas::full_gradient_threshold_mb(limits)));
    check(faas::check_feasibility(static_cast<double>(largest), 1, limits).feasible,
          fmt::format("{} MB should be feasible at M=1", largest));
    check(!faas::check_feasibility(static_cast<double>(largest + 1), 1, limits).feasible,
          fmt::format("{} MB should be infeasible at M=1", largest + 1));

    for (double g : {42.7, 512.3, 2953.0, 5120.0, 10240.0, 102400.0}) {
        bool seen_feasible = false;
        for (std::int64_t m = 1; m <= 256; m *= 2) {
            const bool f = faas::check_feasibility(g, m, limits).feasible;
            if (seen_feasible && !f) {
                check(false, fmt::format("{} MB: feasible below M={} but not at it", g, m));
            }
            seen_feasible = seen_feasible || f;
        }
        check(seen_feasible, fmt::format("{} MB never becomes feasible up to M=256", g));
    }

    // Reference allocations with the default platform model.
    if (limits.max_memory_mb == 10240.0 && limits.runtime_overhead_mb == 450.0 && limits.streaming_multiplier == 3.0) {
        const std::pair<double, double> refs[] = {
            {2953.0, 9309.0}, {5120.0, 15810.0}, {2953.0 / 4.0, 2665.0}, {5120.0 / 8.0, 2370.0}};
        for (const auto& [input, expected] : refs) {
            const double got = std::ceil(faas::estimate_peak_memory(input, limits));
            check(got == expected, fmt::format("estimate_peak_memory({}) = {}, expected {}", input, got, expected));
        }
    }
    return s;
}

std::vector<SuiteResult> run_all_suites() {
    return {verify_oracle_equivalence(), verify_op_counts(), verify_feasibility_boundary()};
}

}  // namespace shardagg::topo
