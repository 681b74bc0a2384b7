#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shardagg/grad/tensor.hpp"
#include "shardagg/store/object_key.hpp"

namespace shardagg::store {

// Per-stream transfer speeds. Concurrent readers do not share bandwidth.
struct TransferModel {
    double read_mbps = 50.0;
    double write_mbps = 50.0;
    double per_op_latency_s = 0.05;

    // Throws InvalidArgument unless both throughputs are > 0 and the latency
    // is >= 0.
    void validate() const;

    double read_seconds(std::int64_t bytes) const;
    double write_seconds(std::int64_t bytes) const;
};

// Who issued a request; lets the aggregator and client-side columns of the
// S3 operation table be reported separately.
enum class Issuer { ClientUpload = 0, Aggregator = 1, ClientReadback = 2 };
inline constexpr std::size_t kIssuerCount = 3;

struct StoreStats {
    std::int64_t puts = 0;
    std::int64_t gets = 0;
    std::int64_t bytes_written = 0;
    std::int64_t bytes_read = 0;
    std::array<std::int64_t, kIssuerCount> puts_by{};
    std::array<std::int64_t, kIssuerCount> gets_by{};

    std::int64_t puts_from(Issuer i) const { return puts_by[static_cast<std::size_t>(i)]; }
    std::int64_t gets_from(Issuer i) const { return gets_by[static_cast<std::size_t>(i)]; }
    std::int64_t total_ops() const { return puts + gets; }
    bool operator==(const StoreStats&) const = default;
};

// A stored object: a gradient (or shard) plus the FedAvg weight it carries.
// Client uploads have weight 1. A partial sum holds an un-divided sum and the
// total weight of the contributions folded into it.
struct Blob {
    grad::GradientTensor tensor;
    double weight = 1.0;
    bool partial_sum = false;

    std::int64_t bytes() const { return tensor.byte_size(); }
};

// Fires once, the first time `required_count` stored keys match `pattern`.
struct Trigger {
    KeyPattern pattern;
    int required_count = 1;
    std::string action;
};

struct FiredTrigger {
    std::string action;
    KeyPattern pattern;
    std::int64_t sequence = 0;  // store op count at which it fired
};

// In-memory stand-in for an S3 bucket with event notifications.
//
// All operations are applied in call order, which gives callers a total
// order over puts and gets. Fired triggers are queued and returned by
// drain_fired(); they never run inline.
class ObjectStore {
public:
    explicit ObjectStore(TransferModel model = {},
                         std::optional<std::filesystem::path> mirror_dir = std::nullopt);

    // Stores `blob`, returning the simulated transfer time. Throws
    // ProtocolViolation if the key already exists.
    double put(const ObjectKey& key, Blob blob, Issuer issuer);

    // Returns the blob and its simulated transfer time. Throws NotFound.
    std::pair<Blob, double> get(const ObjectKey& key, Issuer issuer);

    bool contains(const ObjectKey& key) const;
    std::size_t object_count() const { return objects_.size(); }

    // Throws InvalidArgument on a non-positive count or a pattern that is
    // already armed. Fires immediately if the condition already holds.
    void register_trigger(Trigger trigger);

    std::vector<FiredTrigger> drain_fired();

    const StoreStats& stats() const { return stats_; }
    void reset_stats() { stats_ = {}; }

    const TransferModel& transfer_model() const { return model_; }

private:
    struct Armed {
        Trigger trigger;
        int matched = 0;
        bool fired = false;
    };

    void fire(Armed& armed);
    void mirror(const std::string& path, const Blob& blob) const;

    TransferModel model_;
    std::optional<std::filesystem::path> mirror_dir_;
    std::map<std::string, Blob> objects_;
    std::vector<Armed> triggers_;
    std::deque<FiredTrigger> fired_;
    StoreStats stats_;
};

}  // namespace shardagg::store
