#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shardagg/faas/platform.hpp"
#include "shardagg/store/object_store.hpp"

namespace shardagg::faas {

struct FunctionSpec {
    std::string name;
    double allocated_memory_mb = 128.0;
    double timeout_s = 900.0;
    std::int64_t input_bytes = 0;  // total bytes the function will read

    void validate(const PlatformLimits& limits) const;
};

enum class OutputKind {
    Mean,        // divide by the accumulated weight and store the average
    PartialSum,  // store the un-divided sum together with its weight
};

// One aggregator's work: stream `inputs` (each `param_count` elements) into
// a running sum and store the outcome at `output`.
struct AggregationTask {
    std::vector<store::ObjectKey> inputs;
    store::ObjectKey output;
    OutputKind output_kind = OutputKind::Mean;
    std::int64_t param_count = 0;
    bool phantom = true;
};

struct InvocationRecord {
    std::string function;
    double start_s = 0.0;
    double read_s = 0.0;
    double compute_s = 0.0;
    double write_s = 0.0;
    double cold_start_s = 0.0;
    double total_s = 0.0;
    double billed_duration_s = 0.0;  // total rounded up to 1 ms
    double peak_memory_estimate_mb = 0.0;
    double allocated_memory_mb = 0.0;
    double billed_gb_seconds = 0.0;
    std::int64_t gets = 0;
    std::int64_t puts = 0;
    std::int64_t bytes_read = 0;
    std::int64_t bytes_written = 0;
    // Host wall time spent in accumulation (Materialized runs only). Never
    // feeds the simulated timeline.
    double measured_compute_s = 0.0;
    // Largest amount of gradient data the function held at once.
    std::int64_t measured_peak_live_bytes = 0;

    double end_s() const { return start_s + total_s; }
};

struct ExecutorConfig {
    PlatformLimits limits;
    double compute_mbps = 5225.0;
    bool cold_start = false;
    double cold_start_penalty_s = 3.0;

    void validate() const;
};

class VirtualClock {
public:
    double now() const { return now_; }
    void advance_by(double dt);

private:
    double now_ = 0.0;
};

struct Invocation {
    FunctionSpec spec;
    AggregationTask task;
};

struct PhaseRecord {
    std::string name;
    double start_s = 0.0;
    double wall_clock_s = 0.0;       // max over members
    double billed_gb_seconds = 0.0;  // sum over members
    std::vector<InvocationRecord> invocations;

    // The member that determines the phase duration.
    const InvocationRecord& critical() const;
};

// Runs aggregation functions against an ObjectStore on a virtual clock.
// Members of a phase share one start time and are evaluated one after the
// other; the phase lasts as long as its slowest member.
class FunctionExecutor {
public:
    FunctionExecutor(store::ObjectStore& store, ExecutorConfig config);

    // Throws OutOfMemory when the peak estimate exceeds the allocation,
    // Timeout when the total exceeds spec.timeout_s, StateError for a task
    // without inputs and NotFound when an input is missing.
    InvocationRecord invoke(const FunctionSpec& spec, const AggregationTask& task, const VirtualClock& clock);

    // Errors are rethrown with the phase and function name prefixed.
    PhaseRecord run_phase(const std::string& name, std::span<const Invocation> members, VirtualClock& clock);

    const ExecutorConfig& config() const { return config_; }

private:
    store::ObjectStore& store_;
    ExecutorConfig config_;
};

}  // namespace shardagg::faas
