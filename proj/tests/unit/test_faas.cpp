#include <gtest/gtest.h>

#include <cmath>

#include "shardagg/errors.hpp"
#include "shardagg/faas/executor.hpp"
#include "shardagg/faas/platform.hpp"
#include "shardagg/grad/fedavg.hpp"
#include "shardagg/grad/sharding.hpp"

using namespace shardagg;
using namespace shardagg::faas;
using grad::GradientTensor;
using store::Blob;
using store::Issuer;
using store::ObjectKey;
using store::ObjectStore;

namespace {

// Puts N client copies of shard `j` and returns the task reading them.
AggregationTask seed_shard_task(ObjectStore& s, int clients, int j, const GradientTensor& g) {
    AggregationTask t;
    for (int i = 0; i < clients; ++i) {
        const auto k = ObjectKey::client_shard(0, i, j);
        s.put(k, {g}, Issuer::ClientUpload);
        t.inputs.push_back(k);
    }
    t.output = ObjectKey::shard_result(0, j);
    t.param_count = g.param_count();
    t.phantom = g.is_phantom();
    return t;
}

FunctionSpec spec_for(const std::string& name, double memory_mb) { return {name, memory_mb, 900.0, 0}; }

}  // namespace

TEST(Platform, PeakMemoryFormula) {
    EXPECT_DOUBLE_EQ(estimate_peak_memory(2953.0), 9309.0);
    EXPECT_DOUBLE_EQ(estimate_peak_memory(5120.0), 15810.0);
    EXPECT_DOUBLE_EQ(estimate_peak_memory(738.0), 2664.0);
    EXPECT_DOUBLE_EQ(std::ceil(estimate_peak_memory(2953.0 / 4.0)), 2665.0);
    EXPECT_DOUBLE_EQ(estimate_peak_memory(0.0), 450.0);
    EXPECT_THROW(estimate_peak_memory(-1.0), InvalidArgument);
}

TEST(Platform, PeakMemoryStrictlyIncreasing) {
    double prev = estimate_peak_memory(0.0);
    for (double mb = 0.5; mb < 20000.0; mb *= 1.7) {
        const double v = estimate_peak_memory(mb);
        ASSERT_GT(v, prev);
        prev = v;
    }
}

TEST(Platform, StreamingLowerBound) {
    EXPECT_NEAR(streaming_lower_bound(grad::params_for_mb(512.0), 4), 256.0, 1e-6);
    EXPECT_NEAR(streaming_lower_bound(grad::params_for_mb(42.7), 16), 5.3, 0.05);
    EXPECT_NEAR(streaming_lower_bound(grad::params_for_mb(512.3), 1), 1024.6, 1e-3);
    EXPECT_THROW(streaming_lower_bound(100, 0), InvalidArgument);
}

TEST(Platform, CollectThenAverage) {
    EXPECT_NEAR(collect_then_average_memory(512.3, 20), 21 * 512.3, 1e-9);
    EXPECT_THROW(collect_then_average_memory(1.0, 0), InvalidArgument);
}

TEST(Platform, FeasibilityVerdicts) {
    const auto gpt = check_feasibility(2953.0, 1);
    EXPECT_TRUE(gpt.feasible);
    EXPECT_DOUBLE_EQ(gpt.required_mb, 9309.0);
    EXPECT_NEAR(gpt.utilization, 0.91, 0.005);

    const auto synth = check_feasibility(5120.0, 1);
    EXPECT_FALSE(synth.feasible);
    EXPECT_DOUBLE_EQ(synth.required_mb, 15810.0);

    const auto synth8 = check_feasibility(5120.0, 8);
    EXPECT_TRUE(synth8.feasible);
    EXPECT_DOUBLE_EQ(synth8.required_mb, 2370.0);
    EXPECT_THROW(check_feasibility(1.0, 0), InvalidArgument);
}

TEST(Platform, IntegerThresholdScan) {
    std::int64_t largest = 0;
    for (std::int64_t mb = 1; mb <= 11000; ++mb) {
        if (check_feasibility(static_cast<double>(mb), 1).feasible) largest = mb;
    }
    EXPECT_EQ(largest, 3263);
    EXPECT_TRUE(check_feasibility(3263.0, 1).feasible);
    EXPECT_FALSE(check_feasibility(3264.0, 1).feasible);
    EXPECT_NEAR(full_gradient_threshold_mb(), 3263.33, 0.01);
}

TEST(Platform, FeasibilityMonotoneInShards) {
    for (double g : {100.0, 3263.0, 3264.0, 5120.0, 40000.0}) {
        bool seen = false;
        for (std::int64_t m = 1; m <= 64; ++m) {
            const bool f = check_feasibility(g, m).feasible;
            ASSERT_FALSE(seen && !f) << g << " MB, M=" << m;
            seen = seen || f;
        }
    }
}

TEST(Platform, MinShardsAndProvisioning) {
    EXPECT_EQ(min_shards_for(2953.0), 1);
    EXPECT_EQ(min_shards_for(5120.0), 2);
    EXPECT_EQ(min_shards_for(2953.0, {}, 0.5), 2);
    EXPECT_THROW(min_shards_for(1.0, {}, 0.0), InvalidArgument);
    EXPECT_THROW(min_shards_for(1.0, {}, 0.01), InvalidArgument);
    EXPECT_DOUBLE_EQ(auto_provision_mb(2664.75), 2665.0);
    EXPECT_DOUBLE_EQ(auto_provision_mb(10.0), 128.0);
    EXPECT_DOUBLE_EQ(auto_provision_mb(20000.0), 10240.0);
}

TEST(Platform, ComputeTimeModel) {
    const auto vgg = GradientTensor::phantom_mb(512.3).byte_size();
    EXPECT_NEAR(compute_time_model(20 * vgg, 5225.0), 1.96, 0.005);
    EXPECT_NEAR(compute_time_model(20 * GradientTensor::phantom_mb(32.0).byte_size(), 5225.0), 0.13, 0.013);
    EXPECT_DOUBLE_EQ(compute_time_model(0, 5225.0), 0.0);
    EXPECT_THROW(compute_time_model(1, 0.0), InvalidArgument);
}

TEST(Platform, LimitsValidation) {
    EXPECT_NO_THROW(PlatformLimits{}.validate());
    PlatformLimits bad;
    bad.min_memory_mb = 20000.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    PlatformLimits mult;
    mult.streaming_multiplier = 0.0;
    EXPECT_THROW(mult.validate(), InvalidArgument);
}

TEST(Executor, Vgg16SingleAggregatorReadTime) {
    ObjectStore s(store::TransferModel{57.0, 57.0, 0.0});
    const auto task = seed_shard_task(s, 20, 0, GradientTensor::phantom_mb(512.3));
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    const auto r = ex.invoke(spec_for("shard-agg-0", 3008.0), task, clock);
    EXPECT_GE(r.read_s, 158.0);
    EXPECT_LE(r.read_s, 202.0);
    EXPECT_NEAR(r.read_s, 20 * 512.3 / 57.0, 1e-6);
    EXPECT_NEAR(r.compute_s, 1.96, 0.005);
    EXPECT_NEAR(r.write_s, 512.3 / 57.0, 1e-6);
    EXPECT_DOUBLE_EQ(r.total_s, r.read_s + r.compute_s + r.write_s);
    EXPECT_EQ(r.gets, 20);
    EXPECT_EQ(r.puts, 1);
    EXPECT_DOUBLE_EQ(r.cold_start_s, 0.0);
    EXPECT_NEAR(r.peak_memory_estimate_mb, estimate_peak_memory(512.3), 1e-4);
}

TEST(Executor, BilledDurationRoundsUpToMillisecond) {
    ObjectStore s(store::TransferModel{50.0, 50.0, 0.0});
    const auto task = seed_shard_task(s, 3, 0, GradientTensor::phantom(1000));
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    const auto r = ex.invoke(spec_for("f", 1024.0), task, clock);
    EXPECT_GE(r.billed_duration_s, r.total_s);
    EXPECT_LT(r.billed_duration_s - r.total_s, 0.001 + 1e-9);
    EXPECT_NEAR(std::round(r.billed_duration_s * 1000.0), r.billed_duration_s * 1000.0, 1e-6);
    EXPECT_DOUBLE_EQ(r.billed_gb_seconds, 1024.0 / 1024.0 * r.billed_duration_s);
}

TEST(Executor, OutOfMemoryWhenAllocationTooSmall) {
    ObjectStore s;
    const auto shard = grad::shard(GradientTensor::phantom_mb(2953.0), 4)[0];
    const auto task = seed_shard_task(s, 2, 0, shard);
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    try {
        (void)ex.invoke(spec_for("gpt2-large-shard", 2048.0), task, clock);
        FAIL() << "expected OutOfMemory";
    } catch (const OutOfMemory& e) {
        EXPECT_NEAR(e.required_mb(), 2664.75, 1e-6);
        EXPECT_DOUBLE_EQ(e.allocated_mb(), 2048.0);
    }
    EXPECT_EQ(s.stats().gets, 0);  // rejected before any I/O
}

TEST(Executor, TimeoutIsAnError) {
    ObjectStore s(store::TransferModel{1.0, 1.0, 0.0});
    const auto task = seed_shard_task(s, 2, 0, GradientTensor::phantom_mb(8.0));
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    FunctionSpec spec{"slow", 1024.0, 10.0, 0};
    EXPECT_THROW((void)ex.invoke(spec, task, clock), Timeout);
}

TEST(Executor, EmptyTaskIsStateError) {
    ObjectStore s;
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    AggregationTask t;
    t.output = ObjectKey::shard_result(0, 0);
    t.param_count = 4;
    EXPECT_THROW((void)ex.invoke(spec_for("empty", 512.0), t, clock), StateError);
}

TEST(Executor, MissingInputIsNotFound) {
    ObjectStore s;
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    AggregationTask t;
    t.inputs = {ObjectKey::client_shard(0, 0, 0)};
    t.output = ObjectKey::shard_result(0, 0);
    t.param_count = 4;
    EXPECT_THROW((void)ex.invoke(spec_for("orphan", 512.0), t, clock), NotFound);
}

TEST(Executor, SpecValidation) {
    const PlatformLimits limits;
    EXPECT_THROW((FunctionSpec{"a", 64.0, 900.0, 0}.validate(limits)), InvalidArgument);
    EXPECT_THROW((FunctionSpec{"a", 20000.0, 900.0, 0}.validate(limits)), InvalidArgument);
    EXPECT_THROW((FunctionSpec{"a", 1024.0, 901.0, 0}.validate(limits)), InvalidArgument);
    EXPECT_NO_THROW((FunctionSpec{"a", 1024.0, 900.0, 0}.validate(limits)));
}

TEST(Executor, ColdStartAddsPenalty) {
    ExecutorConfig cfg;
    cfg.cold_start = true;
    ObjectStore s(store::TransferModel{50.0, 50.0, 0.0});
    const auto task = seed_shard_task(s, 2, 0, GradientTensor::phantom(100));
    FunctionExecutor ex(s, cfg);
    VirtualClock clock;
    const auto r = ex.invoke(spec_for("cold", 512.0), task, clock);
    EXPECT_DOUBLE_EQ(r.cold_start_s, 3.0);
    EXPECT_DOUBLE_EQ(r.total_s, r.read_s + r.compute_s + r.write_s + 3.0);
}

TEST(Executor, MaterializedResultIsMean) {
    ObjectStore s;
    AggregationTask t;
    std::vector<GradientTensor> inputs;
    for (int i = 0; i < 5; ++i) {
        inputs.push_back(GradientTensor::random_uniform(64, 100 + i));
        const auto k = ObjectKey::client_shard(0, i, 0);
        s.put(k, {inputs.back()}, Issuer::ClientUpload);
        t.inputs.push_back(k);
    }
    t.output = ObjectKey::shard_result(0, 0);
    t.param_count = 64;
    t.phantom = false;
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    const auto r = ex.invoke(spec_for("m", 512.0), t, clock);
    EXPECT_LE(r.measured_peak_live_bytes, 2 * 64 * 4);
    const auto out = s.get(t.output, Issuer::ClientReadback).first;
    EXPECT_TRUE(out.tensor.bit_identical(grad::fedavg_flat(inputs)));
    EXPECT_FALSE(out.partial_sum);
}

TEST(Executor, PartialSumOutputCarriesWeight) {
    ObjectStore s;
    AggregationTask t;
    for (int i = 0; i < 3; ++i) {
        const auto k = ObjectKey::client_gradient(0, i);
        s.put(k, {GradientTensor::materialized({static_cast<float>(i)})}, Issuer::ClientUpload);
        t.inputs.push_back(k);
    }
    t.output = ObjectKey::partial(0, store::KeyRole::LeafPartial, 0);
    t.output_kind = OutputKind::PartialSum;
    t.param_count = 1;
    t.phantom = false;
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    (void)ex.invoke(spec_for("leaf", 512.0), t, clock);
    const auto out = s.get(t.output, Issuer::Aggregator).first;
    EXPECT_TRUE(out.partial_sum);
    EXPECT_DOUBLE_EQ(out.weight, 3.0);
    EXPECT_EQ(out.tensor.values()[0], 3.0f);
}

TEST(Executor, PhaseWallClockIsMaxAndBillingIsSum) {
    ObjectStore s(store::TransferModel{50.0, 50.0, 0.0});
    std::vector<Invocation> members;
    for (int j = 0; j < 3; ++j) {
        const auto task = seed_shard_task(s, 2 + j, j, GradientTensor::phantom_mb(10.0 * (j + 1)));
        members.push_back({spec_for("agg-" + std::to_string(j), 1024.0), task});
    }
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    clock.advance_by(5.0);
    const auto phase = ex.run_phase("shards", members, clock);
    double max_total = 0.0, gbs = 0.0;
    for (const auto& r : phase.invocations) {
        EXPECT_DOUBLE_EQ(r.start_s, 5.0);
        max_total = std::max(max_total, r.total_s);
        gbs += r.billed_gb_seconds;
    }
    EXPECT_DOUBLE_EQ(phase.wall_clock_s, max_total);
    EXPECT_DOUBLE_EQ(phase.billed_gb_seconds, gbs);
    EXPECT_EQ(phase.critical().function, "agg-2");
    EXPECT_DOUBLE_EQ(clock.now(), 5.0 + max_total);
}

TEST(Executor, SingleMemberPhaseEqualsItsInvocation) {
    ObjectStore s;
    const auto task = seed_shard_task(s, 4, 0, GradientTensor::phantom_mb(1.0));
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    std::vector<Invocation> one{{spec_for("solo", 512.0), task}};
    const auto phase = ex.run_phase("solo-phase", one, clock);
    EXPECT_DOUBLE_EQ(phase.wall_clock_s, phase.invocations[0].total_s);
}

TEST(Executor, PhaseErrorsNamePhaseAndFunction) {
    ObjectStore s;
    AggregationTask t;
    t.inputs = {ObjectKey::client_shard(0, 0, 0)};
    t.output = ObjectKey::shard_result(0, 0);
    t.param_count = 4;
    FunctionExecutor ex(s, {});
    VirtualClock clock;
    std::vector<Invocation> members{{spec_for("agg-0", 512.0), t}};
    try {
        (void)ex.run_phase("shard-aggregation", members, clock);
        FAIL() << "expected NotFound";
    } catch (const NotFound& e) {
        EXPECT_NE(std::string(e.what()).find("shard-aggregation"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("agg-0"), std::string::npos);
    }
}

TEST(Executor, DeterministicRecords) {
    auto run = [] {
        ObjectStore s;
        const auto task = seed_shard_task(s, 7, 0, GradientTensor::phantom_mb(3.3));
        FunctionExecutor ex(s, {});
        VirtualClock clock;
        const auto r = ex.invoke(spec_for("d", 512.0), task, clock);
        return std::vector<double>{r.read_s, r.compute_s, r.write_s, r.total_s, r.billed_gb_seconds};
    };
    EXPECT_EQ(run(), run());
}
