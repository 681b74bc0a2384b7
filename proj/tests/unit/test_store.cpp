#include <gtest/gtest.h>

#include <filesystem>

#include "shardagg/errors.hpp"
#include "shardagg/grad/fedavg.hpp"
#include "shardagg/store/object_key.hpp"
#include "shardagg/store/object_store.hpp"

using namespace shardagg;
using namespace shardagg::store;
using grad::GradientTensor;

namespace {

Blob phantom_blob(double mb) { return {GradientTensor::phantom_mb(mb)}; }

std::int64_t bytes_for_mb(double mb) { return GradientTensor::phantom_mb(mb).byte_size(); }

KeyPattern shard_pattern(int shard) { return {0, KeyRole::ClientShard, shard, std::nullopt}; }

}  // namespace

TEST(ObjectKey, CanonicalPaths) {
    EXPECT_EQ(ObjectKey::client_shard(0, 7, 2).path(), "r0/client_shard/c07/s2");
    EXPECT_EQ(ObjectKey::shard_result(0, 2).path(), "r0/shard_result/s2");
    EXPECT_EQ(ObjectKey::partial(0, KeyRole::LeafPartial, 1).path(), "r0/leaf_partial/l1");
    EXPECT_EQ(ObjectKey::partial(3, KeyRole::Level2Partial, 0).path(), "r3/level2_partial/l0");
    EXPECT_EQ(ObjectKey::client_gradient(1, 123).path(), "r1/client_gradient/c123");
    EXPECT_EQ(ObjectKey::root_result(0).path(), "r0/root_result");
}

TEST(ObjectKey, ParseRoundTrips) {
    const ObjectKey keys[] = {
        ObjectKey::client_shard(0, 7, 2),          ObjectKey::shard_result(4, 15),
        ObjectKey::partial(0, KeyRole::Level1Partial, 6), ObjectKey::client_gradient(2, 19),
        ObjectKey::root_result(9),
    };
    for (const auto& k : keys) EXPECT_EQ(ObjectKey::parse(k.path()), k) << k.path();
}

TEST(ObjectKey, ParseRejectsNonCanonical) {
    for (const char* bad : {"", "r0", "r0/client_shard/c7/s2", "r0/client_shard/c07", "x0/root_result",
                            "r0/root_result/", "r0/leaf_partial/s1", "r-1/root_result", "r0/unknown/c01",
                            "r0/shard_result/s02", "r00/root_result"}) {
        EXPECT_THROW(ObjectKey::parse(bad), InvalidArgument) << bad;
    }
}

TEST(ObjectKey, ValidateRequiresRoleFields) {
    ObjectKey k;
    k.role = KeyRole::ClientShard;
    k.client_id = 1;
    EXPECT_THROW(k.validate(), InvalidArgument);  // no shard index
    k.shard_index = 0;
    EXPECT_NO_THROW(k.validate());
    k.level_index = 0;
    EXPECT_THROW(k.validate(), InvalidArgument);

    ObjectKey p;
    p.role = KeyRole::LeafPartial;
    EXPECT_THROW(p.validate(), InvalidArgument);
    ObjectKey g;
    g.role = KeyRole::ClientGradient;
    EXPECT_THROW(g.validate(), InvalidArgument);
}

TEST(KeyPattern, MatchesShardAndMemberRange) {
    KeyPattern p{0, KeyRole::ClientShard, 2, grad::IndexRange{5, 10}};
    EXPECT_TRUE(p.matches(ObjectKey::client_shard(0, 5, 2)));
    EXPECT_FALSE(p.matches(ObjectKey::client_shard(0, 10, 2)));
    EXPECT_FALSE(p.matches(ObjectKey::client_shard(0, 6, 1)));
    EXPECT_FALSE(p.matches(ObjectKey::client_shard(1, 6, 2)));
    EXPECT_FALSE(p.matches(ObjectKey::shard_result(0, 2)));
}

TEST(TransferModel, Durations) {
    const TransferModel write_only{50.0, 57.5, 0.0};
    EXPECT_NEAR(write_only.write_seconds(bytes_for_mb(512.3)), 512.3 / 57.5, 1e-6);
    EXPECT_NEAR(write_only.write_seconds(bytes_for_mb(512.3)), 8.91, 0.005);

    const TransferModel latency_only{50.0, 50.0, 0.05};
    EXPECT_DOUBLE_EQ(latency_only.write_seconds(0), 0.05);

    const TransferModel r45{45.0, 45.0, 0.0};
    EXPECT_NEAR(r45.read_seconds(bytes_for_mb(42.7)), 0.949, 0.0005);

    const TransferModel r569{56.9, 56.9, 0.0};
    EXPECT_NEAR(r569.read_seconds(bytes_for_mb(512.3)), 9.0, 0.005);
    EXPECT_NEAR(20 * r569.read_seconds(bytes_for_mb(512.3)), 180.0, 0.1);
}

TEST(TransferModel, StrictlyIncreasingInSize) {
    const TransferModel m;
    double prev = m.read_seconds(0);
    for (std::int64_t b = 1; b < (1 << 24); b = b * 3 + 1) {
        const double t = m.read_seconds(b);
        ASSERT_GT(t, prev);
        prev = t;
    }
}

TEST(TransferModel, Validation) {
    EXPECT_THROW((TransferModel{0.0, 50.0, 0.0}.validate()), InvalidArgument);
    EXPECT_THROW((TransferModel{50.0, -1.0, 0.0}.validate()), InvalidArgument);
    EXPECT_THROW((TransferModel{50.0, 50.0, -0.1}.validate()), InvalidArgument);
    EXPECT_THROW(ObjectStore(TransferModel{0.0, 1.0, 0.0}), InvalidArgument);
}

TEST(ObjectStore, PutGetAndCounters) {
    ObjectStore s(TransferModel{50.0, 50.0, 0.0});
    const auto key = ObjectKey::client_gradient(0, 1);
    const auto g = GradientTensor::random_uniform(256, 1);
    s.put(key, {g}, Issuer::ClientUpload);
    EXPECT_TRUE(s.contains(key));
    auto [blob, t] = s.get(key, Issuer::Aggregator);
    EXPECT_TRUE(blob.tensor.bit_identical(g));
    EXPECT_DOUBLE_EQ(t, 1024.0 / 1048576.0 / 50.0);
    const auto& st = s.stats();
    EXPECT_EQ(st.puts, 1);
    EXPECT_EQ(st.gets, 1);
    EXPECT_EQ(st.bytes_written, 1024);
    EXPECT_EQ(st.bytes_read, 1024);
    EXPECT_EQ(st.puts_from(Issuer::ClientUpload), 1);
    EXPECT_EQ(st.gets_from(Issuer::Aggregator), 1);
    EXPECT_EQ(st.gets_from(Issuer::ClientReadback), 0);
}

TEST(ObjectStore, DuplicatePutIsProtocolViolation) {
    ObjectStore s;
    s.put(ObjectKey::root_result(0), phantom_blob(1), Issuer::Aggregator);
    EXPECT_THROW(s.put(ObjectKey::root_result(0), phantom_blob(1), Issuer::Aggregator), ProtocolViolation);
}

TEST(ObjectStore, MissingKeyIsNotFound) {
    ObjectStore s;
    EXPECT_THROW(s.get(ObjectKey::root_result(0), Issuer::Aggregator), NotFound);
    EXPECT_EQ(s.stats().gets, 0);
}

TEST(ObjectStore, ResetZeroesCounters) {
    ObjectStore s;
    s.put(ObjectKey::root_result(0), phantom_blob(1), Issuer::Aggregator);
    (void)s.get(ObjectKey::root_result(0), Issuer::ClientReadback);
    s.reset_stats();
    EXPECT_EQ(s.stats(), StoreStats{});
}

TEST(ObjectStore, ShardTriggersFireOncePerShard) {
    ObjectStore s;
    for (int j = 0; j < 4; ++j) s.register_trigger({shard_pattern(j), 20, "agg-" + std::to_string(j)});
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 4; ++j) s.put(ObjectKey::client_shard(0, i, j), phantom_blob(0.01), Issuer::ClientUpload);
        if (i < 19) {
            EXPECT_TRUE(s.drain_fired().empty()) << "fired early at client " << i;
        }
    }
    const auto fired = s.drain_fired();
    ASSERT_EQ(fired.size(), 4u);
    for (int j = 0; j < 4; ++j) EXPECT_EQ(fired[j].action, "agg-" + std::to_string(j));
    EXPECT_EQ(s.stats().puts, 80);
    EXPECT_TRUE(s.drain_fired().empty());
}

TEST(ObjectStore, TriggerFiresOnTwentiethShardTwoPut) {
    ObjectStore s;
    s.register_trigger({shard_pattern(2), 20, "agg-2"});
    for (int i = 0; i < 19; ++i) s.put(ObjectKey::client_shard(0, i, 2), phantom_blob(0.01), Issuer::ClientUpload);
    s.put(ObjectKey::client_shard(0, 0, 1), phantom_blob(0.01), Issuer::ClientUpload);
    EXPECT_TRUE(s.drain_fired().empty());
    s.put(ObjectKey::client_shard(0, 19, 2), phantom_blob(0.01), Issuer::ClientUpload);
    const auto fired = s.drain_fired();
    ASSERT_EQ(fired.size(), 1u);
    EXPECT_EQ(fired[0].pattern, shard_pattern(2));
    EXPECT_EQ(fired[0].sequence, 21);
}

TEST(ObjectStore, CountOneTriggerFiresOnFirstPut) {
    ObjectStore s;
    s.register_trigger({{0, KeyRole::ShardResult, std::nullopt, std::nullopt}, 1, "first"});
    s.put(ObjectKey::shard_result(0, 3), phantom_blob(1), Issuer::Aggregator);
    s.put(ObjectKey::shard_result(0, 4), phantom_blob(1), Issuer::Aggregator);
    EXPECT_EQ(s.drain_fired().size(), 1u);
}

TEST(ObjectStore, LeafTriggersFireOncePerGroup) {
    ObjectStore s;
    for (int g = 0; g < 4; ++g) {
        s.register_trigger({{0, KeyRole::ClientGradient, std::nullopt, grad::IndexRange{g * 5, g * 5 + 5}}, 5,
                            "leaf-" + std::to_string(g)});
    }
    for (int i = 0; i < 20; ++i) s.put(ObjectKey::client_gradient(0, i), phantom_blob(0.01), Issuer::ClientUpload);
    const auto fired = s.drain_fired();
    ASSERT_EQ(fired.size(), 4u);
    for (int g = 0; g < 4; ++g) EXPECT_EQ(fired[g].action, "leaf-" + std::to_string(g));
}

TEST(ObjectStore, TriggerAlreadySatisfiedFiresAtRegistration) {
    ObjectStore s;
    s.put(ObjectKey::client_shard(0, 0, 0), phantom_blob(0.01), Issuer::ClientUpload);
    s.register_trigger({shard_pattern(0), 1, "now"});
    EXPECT_EQ(s.drain_fired().size(), 1u);
}

TEST(ObjectStore, TriggerRegistrationErrors) {
    ObjectStore s;
    s.register_trigger({shard_pattern(0), 2, "a"});
    EXPECT_THROW(s.register_trigger({shard_pattern(0), 3, "b"}), InvalidArgument);
    EXPECT_THROW(s.register_trigger({shard_pattern(1), 0, "c"}), InvalidArgument);
    EXPECT_THROW(s.register_trigger({{0, KeyRole::ClientShard, 1, grad::IndexRange{3, 3}}, 1, "d"}), InvalidArgument);
}

TEST(ObjectStore, IdenticalSequencesAreDeterministic) {
    auto run = [] {
        ObjectStore s;
        std::vector<double> times;
        for (int i = 0; i < 10; ++i) times.push_back(s.put(ObjectKey::client_gradient(0, i), phantom_blob(i + 1), Issuer::ClientUpload));
        for (int i = 0; i < 10; ++i) times.push_back(s.get(ObjectKey::client_gradient(0, i), Issuer::Aggregator).second);
        return std::make_pair(s.stats(), times);
    };
    EXPECT_EQ(run(), run());
}

TEST(ObjectStore, MirrorModeWritesFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "shardagg_store_mirror";
    std::filesystem::remove_all(dir);
    ObjectStore s(TransferModel{}, dir);
    const auto g = GradientTensor::random_uniform(16, 5);
    s.put(ObjectKey::client_shard(0, 7, 2), {g}, Issuer::ClientUpload);
    s.put(ObjectKey::root_result(0), phantom_blob(2), Issuer::Aggregator);
    EXPECT_TRUE(grad::read_golden(dir / "r0/client_shard/c07/s2.f32").bit_identical(g));
    EXPECT_TRUE(std::filesystem::exists(dir / "r0/root_result.phantom"));
    std::filesystem::remove_all(dir);
}
