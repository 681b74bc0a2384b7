#include "shardagg/topo/round.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "shardagg/errors.hpp"
#include "shardagg/grad/sharding.hpp"

namespace shardagg::topo {

using store::Issuer;

TimeBreakdown RoundMetrics::critical_path() const {
    TimeBreakdown t;
    for (const auto& p : phases) {
        const auto& c = p.critical();
        t.read_s += c.read_s;
        t.compute_s += c.compute_s;
        t.write_s += c.write_s;
    }
    return t;
}

std::int64_t RoundMetrics::invocation_count() const {
    std::int64_t n = 0;
    for (const auto& p : phases) n += static_cast<std::int64_t>(p.invocations.size());
    return n;
}

namespace {

template <typename F>
double max_over_invocations(const std::vector<faas::PhaseRecord>& phases, F&& field) {
    double best = 0.0;
    for (const auto& p : phases) {
        for (const auto& r : p.invocations) best = std::max(best, static_cast<double>(field(r)));
    }
    return best;
}

store::StoreStats delta(const store::StoreStats& after, const store::StoreStats& before) {
    store::StoreStats d;
    d.puts = after.puts - before.puts;
    d.gets = after.gets - before.gets;
    d.bytes_written = after.bytes_written - before.bytes_written;
    d.bytes_read = after.bytes_read - before.bytes_read;
    for (std::size_t i = 0; i < store::kIssuerCount; ++i) {
        d.puts_by[i] = after.puts_by[i] - before.puts_by[i];
        d.gets_by[i] = after.gets_by[i] - before.gets_by[i];
    }
    return d;
}

}  // namespace

double RoundMetrics::peak_memory_estimate_mb() const {
    return max_over_invocations(phases, [](const auto& r) { return r.peak_memory_estimate_mb; });
}

double RoundMetrics::allocated_memory_mb() const {
    return max_over_invocations(phases, [](const auto& r) { return r.allocated_memory_mb; });
}

std::int64_t RoundMetrics::measured_peak_live_bytes() const {
    return static_cast<std::int64_t>(
        max_over_invocations(phases, [](const auto& r) { return r.measured_peak_live_bytes; }));
}

double RoundMetrics::shard_mb() const {
    if (kind.family == Topology::GradsSharding) {
        return grad::mb_for_params(grad::ShardPlan(gradient.param_count, kind.shards).max_shard_params());
    }
    return gradient.size_mb();
}

RoundMetrics execute_round(const RoundPlan& plan, store::ObjectStore& store, faas::FunctionExecutor& executor,
                           std::span<const grad::GradientTensor> clients) {
    if (static_cast<std::int64_t>(clients.size()) != plan.clients) {
        throw InvalidArgument(fmt::format("plan expects {} clients, got {}", plan.clients, clients.size()));
    }
    for (std::size_t i = 0; i < clients.size(); ++i) {
        if (clients[i].param_count() != plan.gradient.param_count) {
            throw InvalidArgument(fmt::format("client {} has {} params, plan expects {}", i,
                                              clients[i].param_count(), plan.gradient.param_count));
        }
        if (clients[i].is_phantom() != plan.gradient.phantom) {
            throw InvalidArgument(fmt::format("client {} payload kind does not match the plan", i));
        }
    }

    const store::StoreStats before = store.stats();
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_action;
    for (std::size_t p = 0; p < plan.phases.size(); ++p) {
        for (std::size_t a = 0; a < plan.phases[p].aggregators.size(); ++a) {
            const auto& agg = plan.phases[p].aggregators[a];
            by_action[agg.trigger.action] = {p, a};
            store.register_trigger(agg.trigger);
        }
    }

    RoundMetrics m;
    m.kind = plan.kind;
    m.clients = plan.clients;
    m.gradient = plan.gradient;
    m.predicted = predicted_s3_ops(plan.kind, plan.clients);

    // Uploads: each client writes its objects one after another.
    for (std::size_t i = 0; i < clients.size(); ++i) {
        double t = 0.0;
        const auto& keys = plan.client_uploads[i];
        if (plan.kind.family == Topology::GradsSharding) {
            const auto parts = grad::shard(clients[i], plan.kind.shards);
            for (std::size_t j = 0; j < keys.size(); ++j) t += store.put(keys[j], {parts[j]}, Issuer::ClientUpload);
        } else {
            t += store.put(keys.front(), {clients[i]}, Issuer::ClientUpload);
        }
        m.client_upload_s = std::max(m.client_upload_s, t);
    }

    faas::VirtualClock clock;
    for (std::size_t p = 0; p < plan.phases.size(); ++p) {
        const auto& phase = plan.phases[p];
        std::set<std::string> fired;
        for (const auto& f : store.drain_fired()) fired.insert(f.action);
        std::set<std::string> expected;
        for (const auto& a : phase.aggregators) expected.insert(a.trigger.action);
        if (fired != expected) {
            throw StateError(fmt::format("phase {} ({}): {} of {} aggregators were triggered", p, phase.name,
                                         fired.size(), expected.size()));
        }
        std::vector<faas::Invocation> members;
        members.reserve(phase.aggregators.size());
        for (const auto& a : phase.aggregators) members.push_back({a.function, a.task});
        m.phases.push_back(executor.run_phase(phase.name, members, clock));
        m.billed_gb_seconds += m.phases.back().billed_gb_seconds;
    }
    if (!store.drain_fired().empty()) {
        throw StateError("triggers fired after the last aggregation phase");
    }
    m.wall_clock_s = clock.now();

    // Read-back: every client fetches the result objects; client 0's copy is
    // kept as the round result.
    for (std::size_t i = 0; i < clients.size(); ++i) {
        double t = 0.0;
        std::vector<grad::GradientTensor> parts;
        for (const auto& key : plan.readback) {
            auto [blob, seconds] = store.get(key, Issuer::ClientReadback);
            t += seconds;
            if (i == 0) parts.push_back(std::move(blob.tensor));
        }
        if (i == 0) m.result = grad::concat(parts);
        m.client_readback_s = std::max(m.client_readback_s, t);
    }

    m.stats = delta(store.stats(), before);
    const S3OpCounts executed{m.stats.puts, m.stats.gets_from(Issuer::Aggregator),
                              m.stats.gets_from(Issuer::ClientReadback)};
    if (executed != m.predicted) {
        throw InvariantViolation(fmt::format("{} N={}: executed ops {}/{}/{} differ from predicted {}/{}/{}",
                                             plan.kind.label(), plan.clients, executed.puts, executed.gets_agg,
                                             executed.gets_clients, m.predicted.puts, m.predicted.gets_agg,
                                             m.predicted.gets_clients));
    }
    return m;
}

std::vector<grad::GradientTensor> make_clients(std::int64_t clients, const GradientDescriptor& gradient,
                                               std::uint64_t seed) {
    std::vector<grad::GradientTensor> out;
    out.reserve(static_cast<std::size_t>(clients));
    for (std::int64_t i = 0; i < clients; ++i) {
        out.push_back(gradient.phantom
                          ? grad::GradientTensor::phantom(gradient.param_count)
                          : grad::GradientTensor::random_uniform(gradient.param_count, seed + static_cast<std::uint64_t>(i)));
    }
    return out;
}

RoundMetrics simulate_round(const TopologyKind& kind, std::int64_t clients, double gradient_mb,
                            const SimConfig& config) {
    const auto gradient = GradientDescriptor::from_mb(gradient_mb, !config.materialize(gradient_mb));
    const RoundPlan rp = plan(kind, clients, gradient, config.executor.limits, config.plan);
    store::ObjectStore store(config.transfer);
    faas::FunctionExecutor executor(store, config.executor);
    const auto inputs = make_clients(clients, gradient, config.seed);
    return execute_round(rp, store, executor, inputs);
}

std::vector<SweepPoint> sweep(std::span<const GridPoint> grid, std::int64_t clients, const SimConfig& config) {
    if (grid.empty()) throw InvalidArgument("sweep needs at least one grid point");
    std::vector<SweepPoint> out;
    out.reserve(grid.size());
    for (const auto& g : grid) {
        SweepPoint sp;
        sp.point = g;
        sp.clients = clients;
        const double object_mb = g.kind.family == Topology::GradsSharding
                                     ? g.gradient_mb / static_cast<double>(std::max<std::int64_t>(g.kind.shards, 1))
                                     : g.gradient_mb;
        const auto verdict = faas::check_feasibility(object_mb, 1, config.executor.limits);
        sp.required_mb = verdict.required_mb;
        sp.limit_mb = config.executor.limits.max_memory_mb;
        sp.utilization = verdict.utilization;
        try {
            sp.metrics = simulate_round(g.kind, clients, g.gradient_mb, config);
        } catch (const Infeasible& e) {
            sp.failure = e.what();
            sp.required_mb = e.required_mb();
        } catch (const OutOfMemory& e) {
            sp.failure = e.what();
            sp.required_mb = e.required_mb();
        } catch (const Timeout& e) {
            sp.failure = e.what();
        }
        out.push_back(std::move(sp));
    }
    const auto& first = out.front();
    for (auto& sp : out) {
        if (first.feasible() && sp.feasible() && sp.metrics->wall_clock_s > 0.0) {
            sp.speedup = first.metrics->wall_clock_s / sp.metrics->wall_clock_s;
        }
    }
    return out;
}

}  // namespace shardagg::topo
