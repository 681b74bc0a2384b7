#include "shardagg/faas/executor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "shardagg/errors.hpp"
#include "shardagg/grad/accumulator.hpp"

namespace shardagg::faas {

namespace {

// Tracks gradient bytes resident in one function instance.
class LiveBytes {
public:
    void acquire(std::int64_t bytes) {
        live_ += bytes;
        peak_ = std::max(peak_, live_);
    }
    void release(std::int64_t bytes) { live_ -= bytes; }
    std::int64_t peak() const { return peak_; }

private:
    std::int64_t live_ = 0;
    std::int64_t peak_ = 0;
};

double round_up_to_ms(double seconds) {
    // The epsilon keeps exact millisecond values (181.9 s) from rounding up
    // on binary representation noise.
    return std::ceil(seconds * 1000.0 - 1e-6) / 1000.0;
}

template <typename F>
auto with_context(const std::string& context, F&& body) {
    try {
        return body();
    } catch (const OutOfMemory& e) {
        throw OutOfMemory(context + e.what(), e.required_mb(), e.allocated_mb());
    } catch (const Timeout& e) {
        throw Timeout(context + e.what(), e.elapsed_s(), e.limit_s());
    } catch (const NotFound& e) {
        throw NotFound(context + e.what());
    } catch (const StateError& e) {
        throw StateError(context + e.what());
    } catch (const ProtocolViolation& e) {
        throw ProtocolViolation(context + e.what());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(context + e.what());
    }
}

}  // namespace

void FunctionSpec::validate(const PlatformLimits& limits) const {
    if (allocated_memory_mb < limits.min_memory_mb || allocated_memory_mb > limits.max_memory_mb) {
        throw InvalidArgument(fmt::format("function {}: memory {} MB outside [{}, {}]", name, allocated_memory_mb,
                                          limits.min_memory_mb, limits.max_memory_mb));
    }
    if (!(timeout_s > 0.0) || timeout_s > limits.max_timeout_s) {
        throw InvalidArgument(
            fmt::format("function {}: timeout {} s outside (0, {}]", name, timeout_s, limits.max_timeout_s));
    }
}

void ExecutorConfig::validate() const {
    limits.validate();
    if (!(compute_mbps > 0.0)) throw InvalidArgument("compute throughput must be > 0");
    if (!(cold_start_penalty_s >= 0.0)) throw InvalidArgument("cold start penalty must be >= 0");
}

void VirtualClock::advance_by(double dt) {
    if (!(dt >= 0.0)) throw InvalidArgument("virtual clock cannot move backwards");
    now_ += dt;
}

const InvocationRecord& PhaseRecord::critical() const {
    if (invocations.empty()) throw StateError("phase " + name + " has no invocations");
    return *std::max_element(invocations.begin(), invocations.end(),
                             [](const auto& a, const auto& b) { return a.total_s < b.total_s; });
}

FunctionExecutor::FunctionExecutor(store::ObjectStore& store, ExecutorConfig config)
    : store_(store), config_(config) {
    config_.validate();
}

InvocationRecord FunctionExecutor::invoke(const FunctionSpec& spec, const AggregationTask& task,
                                          const VirtualClock& clock) {
    spec.validate(config_.limits);
    if (task.inputs.empty()) {
        throw StateError("function " + spec.name + " has no inputs to aggregate");
    }

    InvocationRecord rec;
    rec.function = spec.name;
    rec.start_s = clock.now();
    rec.allocated_memory_mb = spec.allocated_memory_mb;
    rec.peak_memory_estimate_mb = estimate_peak_memory(grad::mb_for_params(task.param_count), config_.limits);
    if (rec.peak_memory_estimate_mb > spec.allocated_memory_mb) {
        throw OutOfMemory(fmt::format("function {} needs {:.1f} MB but has {:.0f} MB", spec.name,
                                      rec.peak_memory_estimate_mb, spec.allocated_memory_mb),
                          rec.peak_memory_estimate_mb, spec.allocated_memory_mb);
    }
    rec.cold_start_s = config_.cold_start ? config_.cold_start_penalty_s : 0.0;

    LiveBytes live;
    grad::StreamingAccumulator acc(task.param_count, task.phantom);
    const std::int64_t buffer_bytes = task.param_count * grad::kBytesPerParam;
    live.acquire(buffer_bytes);

    std::chrono::steady_clock::duration host_compute{};
    std::int64_t folded_bytes = 0;
    for (const auto& key : task.inputs) {
        auto [blob, seconds] = store_.get(key, store::Issuer::Aggregator);
        rec.read_s += seconds;
        ++rec.gets;
        rec.bytes_read += blob.bytes();
        live.acquire(blob.bytes());

        const auto t0 = std::chrono::steady_clock::now();
        if (blob.partial_sum) {
            acc.merge({blob.tensor, blob.weight});
        } else {
            acc.accumulate(blob.tensor, blob.weight);
        }
        host_compute += std::chrono::steady_clock::now() - t0;
        folded_bytes += blob.bytes();

        const auto released = blob.bytes();
        blob = {};
        live.release(released);
    }
    rec.compute_s = compute_time_model(folded_bytes, config_.compute_mbps);
    if (!task.phantom) {
        rec.measured_compute_s = std::chrono::duration<double>(host_compute).count();
    }

    store::Blob out;
    if (task.output_kind == OutputKind::Mean) {
        const double weight = acc.weight_total();
        out = {acc.finalize(), weight, false};
    } else {
        auto partial = acc.take_partial();
        out = {std::move(partial.sum), partial.weight, true};
    }
    rec.bytes_written = out.bytes();
    rec.write_s = store_.transfer_model().write_seconds(rec.bytes_written);
    rec.total_s = rec.cold_start_s + rec.read_s + rec.compute_s + rec.write_s;
    // A function killed by the timeout never writes its result.
    if (rec.total_s > spec.timeout_s) {
        throw Timeout(fmt::format("function {} ran {:.1f} s, timeout is {:.0f} s", spec.name, rec.total_s,
                                  spec.timeout_s),
                      rec.total_s, spec.timeout_s);
    }
    rec.write_s = store_.put(task.output, std::move(out), store::Issuer::Aggregator);
    rec.puts = 1;
    rec.measured_peak_live_bytes = live.peak();
    rec.billed_duration_s = round_up_to_ms(rec.total_s);
    rec.billed_gb_seconds = spec.allocated_memory_mb / 1024.0 * rec.billed_duration_s;
    return rec;
}

PhaseRecord FunctionExecutor::run_phase(const std::string& name, std::span<const Invocation> members,
                                        VirtualClock& clock) {
    PhaseRecord phase;
    phase.name = name;
    phase.start_s = clock.now();
    for (const auto& m : members) {
        auto rec = with_context(fmt::format("phase {}, function {}: ", name, m.spec.name),
                                [&] { return invoke(m.spec, m.task, clock); });
        phase.wall_clock_s = std::max(phase.wall_clock_s, rec.total_s);
        phase.billed_gb_seconds += rec.billed_gb_seconds;
        phase.invocations.push_back(std::move(rec));
    }
    clock.advance_by(phase.wall_clock_s);
    return phase;
}

}  // namespace shardagg::faas
