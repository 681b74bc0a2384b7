#include "shardagg/store/object_store.hpp"

#include <fstream>

#include <fmt/format.h>

#include "shardagg/errors.hpp"
#include "shardagg/grad/fedavg.hpp"

namespace shardagg::store {

void TransferModel::validate() const {
    if (!(read_mbps > 0.0)) throw InvalidArgument("read throughput must be > 0");
    if (!(write_mbps > 0.0)) throw InvalidArgument("write throughput must be > 0");
    if (!(per_op_latency_s >= 0.0)) throw InvalidArgument("per-op latency must be >= 0");
}

double TransferModel::read_seconds(std::int64_t bytes) const {
    return per_op_latency_s + static_cast<double>(bytes) / grad::kBytesPerMB / read_mbps;
}

double TransferModel::write_seconds(std::int64_t bytes) const {
    return per_op_latency_s + static_cast<double>(bytes) / grad::kBytesPerMB / write_mbps;
}

ObjectStore::ObjectStore(TransferModel model, std::optional<std::filesystem::path> mirror_dir)
    : model_(model), mirror_dir_(std::move(mirror_dir)) {
    model_.validate();
}

double ObjectStore::put(const ObjectKey& key, Blob blob, Issuer issuer) {
    const std::string path = key.path();
    if (objects_.contains(path)) {
        throw ProtocolViolation("duplicate put for key " + path);
    }
    const std::int64_t bytes = blob.bytes();
    if (mirror_dir_) mirror(path, blob);
    objects_.emplace(path, std::move(blob));

    ++stats_.puts;
    ++stats_.puts_by[static_cast<std::size_t>(issuer)];
    stats_.bytes_written += bytes;

    for (auto& armed : triggers_) {
        if (armed.fired || !armed.trigger.pattern.matches(key)) continue;
        if (++armed.matched >= armed.trigger.required_count) fire(armed);
    }
    return model_.write_seconds(bytes);
}

std::pair<Blob, double> ObjectStore::get(const ObjectKey& key, Issuer issuer) {
    const std::string path = key.path();
    auto it = objects_.find(path);
    if (it == objects_.end()) {
        throw NotFound("no object at " + path);
    }
    ++stats_.gets;
    ++stats_.gets_by[static_cast<std::size_t>(issuer)];
    stats_.bytes_read += it->second.bytes();
    return {it->second, model_.read_seconds(it->second.bytes())};
}

bool ObjectStore::contains(const ObjectKey& key) const { return objects_.contains(key.path()); }

void ObjectStore::register_trigger(Trigger trigger) {
    if (trigger.required_count < 1) {
        throw InvalidArgument("trigger required_count must be >= 1");
    }
    if (trigger.pattern.members && trigger.pattern.members->size() < 1) {
        throw InvalidArgument("trigger member range is empty: " + trigger.pattern.to_string());
    }
    for (const auto& armed : triggers_) {
        if (armed.trigger.pattern == trigger.pattern) {
            throw InvalidArgument("trigger already registered for " + trigger.pattern.to_string());
        }
    }
    Armed armed{std::move(trigger)};
    for (const auto& [path, blob] : objects_) {
        if (armed.trigger.pattern.matches(ObjectKey::parse(path))) ++armed.matched;
    }
    triggers_.push_back(std::move(armed));
    if (triggers_.back().matched >= triggers_.back().trigger.required_count) {
        fire(triggers_.back());
    }
}

void ObjectStore::fire(Armed& armed) {
    armed.fired = true;
    fired_.push_back({armed.trigger.action, armed.trigger.pattern, stats_.total_ops()});
}

std::vector<FiredTrigger> ObjectStore::drain_fired() {
    std::vector<FiredTrigger> out(fired_.begin(), fired_.end());
    fired_.clear();
    return out;
}

void ObjectStore::mirror(const std::string& path, const Blob& blob) const {
    const auto base = *mirror_dir_ / path;
    std::filesystem::create_directories(base.parent_path());
    if (blob.tensor.is_materialized()) {
        grad::write_golden(base.string() + ".f32", blob.tensor);
    } else {
        std::ofstream out(base.string() + ".phantom");
        out << "param_count " << blob.tensor.param_count() << "\nweight " << blob.weight << "\n";
    }
}

}  // namespace shardagg::store
