#include "shardagg/cli/config.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include <fmt/format.h>

namespace shardagg::cli {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& what)
    : Error(fmt::format("{}: {}", field, what)), field_(std::move(field)) {}

namespace {

ModelSpec registry_entry(const char* name, double mb, std::int64_t shards) {
    return {name, mb, grad::params_for_mb(mb), shards};
}

const std::array<ModelSpec, 5>& registry() {
    static const std::array<ModelSpec, 5> models{
        registry_entry("resnet18", 42.7, 4),
        registry_entry("vgg16", 512.3, 4),
        registry_entry("gpt2-medium", 1354.0, 4),
        registry_entry("gpt2-large", 2953.0, 4),
        registry_entry("synthetic-5gb", 5120.0, 8),
    };
    return models;
}

// Reads the keys of one JSON object, remembering which were consumed so
// leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    template <class T>
    void read(const std::string& key, T& out) {
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        seen_.insert(key);
        if (it->is_null()) throw ConfigError(path(key), "must not be null");
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError(path(key), "expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ConfigError(path(key), "expected a string");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError(path(key), "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->is_number_integer() && !it->is_number_unsigned()) {
                    throw ConfigError(path(key), "expected a non-negative integer");
                }
            }
        } else {
            if (!it->is_number()) throw ConfigError(path(key), "expected a number");
        }
        out = it->get<T>();
    }

    template <class T>
    void read(const std::string& key, std::optional<T>& out) {
        if (!j_.contains(key)) return;
        if (j_.at(key).is_null()) {
            seen_.insert(key);
            out.reset();
            return;
        }
        T v{};
        read(key, v);
        out = v;
    }

    const json* child(const std::string& key) {
        const auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    void reject_unknown() const {
        for (const auto& [k, v] : j_.items()) {
            if (!seen_.contains(k)) throw ConfigError(path(k), "unknown field");
        }
    }

private:
    const json& j_;
    std::string prefix_;
    std::set<std::string> seen_;
};

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
}

}  // namespace

std::span<const ModelSpec> model_registry() { return registry(); }

std::optional<ModelSpec> find_model(std::string_view name) {
    for (const auto& m : registry()) {
        if (m.name == name) return m;
    }
    return std::nullopt;
}

ModelSpec model_for_size(double gradient_mb) {
    for (const auto& m : registry()) {
        if (m.gradient_mb == gradient_mb) return m;
    }
    return {fmt::format("custom-{}mb", gradient_mb), gradient_mb, grad::params_for_mb(gradient_mb), 4};
}

void ExperimentConfig::validate() const {
    require(topo::parse_topology(topology).has_value(), "topology",
            fmt::format("unknown topology '{}' (expected gradsharding, lambdafl or lifl)", topology));
    require(clients >= 1, "clients", "must be >= 1");
    require(shards >= 1, "shards", "must be >= 1");
    if (gradient_mb) {
        require(std::isfinite(*gradient_mb) && *gradient_mb > 0.0, "gradient_mb", "must be > 0");
    } else {
        require(find_model(model).has_value(), "model", fmt::format("unknown model '{}'", model));
    }
    const auto m = resolved_model();
    require(m.param_count >= 1, "gradient_mb", "gradient smaller than one parameter");
    require(shards <= m.param_count, "shards", "exceeds the gradient's parameter count");

    require(std::isfinite(read_mbps) && read_mbps > 0.0, "transfer.read_mbps", "must be > 0");
    if (write_mbps) require(std::isfinite(*write_mbps) && *write_mbps > 0.0, "transfer.write_mbps", "must be > 0");
    require(per_op_latency_s >= 0.0, "transfer.per_op_latency_s", "must be >= 0");

    require(limits.min_memory_mb > 0.0, "platform.min_memory_mb", "must be > 0");
    require(limits.max_memory_mb >= limits.min_memory_mb, "platform.max_memory_mb", "must be >= min_memory_mb");
    require(limits.max_timeout_s > 0.0, "platform.max_timeout_s", "must be > 0");
    require(limits.runtime_overhead_mb >= 0.0, "platform.runtime_overhead_mb", "must be >= 0");
    require(limits.streaming_multiplier > 0.0, "platform.streaming_multiplier", "must be > 0");

    require(prices.lambda_gb_second >= 0.0, "prices.lambda_gb_second", "must be >= 0");
    require(prices.s3_put >= 0.0, "prices.s3_put", "must be >= 0");
    require(prices.s3_get >= 0.0, "prices.s3_get", "must be >= 0");

    require(compute_mbps > 0.0, "executor.compute_mbps", "must be > 0");
    require(cold_start_penalty_s >= 0.0, "executor.cold_start_penalty_s", "must be >= 0");
    if (memory_mb) {
        require(*memory_mb >= limits.min_memory_mb && *memory_mb <= limits.max_memory_mb, "executor.memory_mb",
                fmt::format("must be within [{}, {}] MB", limits.min_memory_mb, limits.max_memory_mb));
    }
    require(timeout_s > 0.0 && timeout_s <= limits.max_timeout_s, "executor.timeout_s",
            fmt::format("must be within (0, {}] s", limits.max_timeout_s));

    require(materialize_threshold_mb >= 0.0, "materialize_threshold_mb", "must be >= 0");
    require(repetitions >= 1, "repetitions", "must be >= 1");
    require(!output_dir.empty(), "output_dir", "must not be empty");
}

ModelSpec ExperimentConfig::resolved_model() const {
    if (gradient_mb) return model_for_size(*gradient_mb);
    if (auto m = find_model(model)) return *m;
    throw ConfigError("model", fmt::format("unknown model '{}'", model));
}

store::TransferModel ExperimentConfig::transfer() const {
    return {read_mbps, write_mbps.value_or(read_mbps), per_op_latency_s};
}

topo::TopologyKind ExperimentConfig::kind() const {
    const auto family = topo::parse_topology(topology);
    if (!family) throw ConfigError("topology", fmt::format("unknown topology '{}'", topology));
    if (*family == topo::Topology::GradsSharding) return topo::TopologyKind::grads_sharding(shards);
    return {*family, 1};
}

topo::SimConfig ExperimentConfig::sim_config() const {
    topo::SimConfig s;
    s.transfer = transfer();
    s.executor.limits = limits;
    s.executor.compute_mbps = compute_mbps;
    s.executor.cold_start = cold_start;
    s.executor.cold_start_penalty_s = cold_start_penalty_s;
    s.plan.timeout_s = timeout_s;
    s.plan.memory_override_mb = memory_mb;
    s.seed = seed;
    s.materialize_threshold_mb = materialize_threshold_mb;
    return s;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    ObjectReader root(j, "");
    root.read("topology", c.topology);
    root.read("shards", c.shards);
    root.read("clients", c.clients);
    root.read("model", c.model);
    root.read("gradient_mb", c.gradient_mb);
    root.read("materialize_threshold_mb", c.materialize_threshold_mb);
    root.read("repetitions", c.repetitions);
    root.read("seed", c.seed);
    root.read("output_dir", c.output_dir);
    if (const json* t = root.child("transfer")) {
        ObjectReader r(*t, "transfer");
        r.read("read_mbps", c.read_mbps);
        r.read("write_mbps", c.write_mbps);
        r.read("per_op_latency_s", c.per_op_latency_s);
        r.reject_unknown();
    }
    if (const json* p = root.child("platform")) {
        ObjectReader r(*p, "platform");
        r.read("min_memory_mb", c.limits.min_memory_mb);
        r.read("max_memory_mb", c.limits.max_memory_mb);
        r.read("max_timeout_s", c.limits.max_timeout_s);
        r.read("runtime_overhead_mb", c.limits.runtime_overhead_mb);
        r.read("streaming_multiplier", c.limits.streaming_multiplier);
        r.reject_unknown();
    }
    if (const json* p = root.child("prices")) {
        ObjectReader r(*p, "prices");
        r.read("lambda_gb_second", c.prices.lambda_gb_second);
        r.read("s3_put", c.prices.s3_put);
        r.read("s3_get", c.prices.s3_get);
        r.reject_unknown();
    }
    if (const json* e = root.child("executor")) {
        ObjectReader r(*e, "executor");
        r.read("compute_mbps", c.compute_mbps);
        r.read("cold_start", c.cold_start);
        r.read("cold_start_penalty_s", c.cold_start_penalty_s);
        r.read("memory_mb", c.memory_mb);
        r.read("timeout_s", c.timeout_s);
        r.reject_unknown();
    }
    root.reject_unknown();
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["topology"] = c.topology;
    j["shards"] = c.shards;
    j["clients"] = c.clients;
    j["model"] = c.model;
    j["gradient_mb"] = c.gradient_mb ? json(*c.gradient_mb) : json(nullptr);
    j["materialize_threshold_mb"] = c.materialize_threshold_mb;
    j["repetitions"] = c.repetitions;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["transfer"] = {{"read_mbps", c.read_mbps},
                     {"write_mbps", c.write_mbps ? json(*c.write_mbps) : json(nullptr)},
                     {"per_op_latency_s", c.per_op_latency_s}};
    j["platform"] = {{"min_memory_mb", c.limits.min_memory_mb},
                     {"max_memory_mb", c.limits.max_memory_mb},
                     {"max_timeout_s", c.limits.max_timeout_s},
                     {"runtime_overhead_mb", c.limits.runtime_overhead_mb},
                     {"streaming_multiplier", c.limits.streaming_multiplier}};
    j["prices"] = {{"lambda_gb_second", c.prices.lambda_gb_second},
                   {"s3_put", c.prices.s3_put},
                   {"s3_get", c.prices.s3_get}};
    j["executor"] = {{"compute_mbps", c.compute_mbps},
                     {"cold_start", c.cold_start},
                     {"cold_start_penalty_s", c.cold_start_penalty_s},
                     {"memory_mb", c.memory_mb ? json(*c.memory_mb) : json(nullptr)},
                     {"timeout_s", c.timeout_s}};
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", fmt::format("cannot open '{}'", path.string()));
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
    return config_from_json(j);
}

void apply_environment(ExperimentConfig& c) {
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') c.output_dir = dir;
}

}  // namespace shardagg::cli
