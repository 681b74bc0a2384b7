#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "shardagg/econ/cost.hpp"
#include "shardagg/errors.hpp"
#include "shardagg/topo/round.hpp"

namespace shardagg::cli {

// Bad configuration or command-line input. `field` is the dotted config
// path (or flag name) at fault.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct ModelSpec {
    std::string name;
    double gradient_mb = 0.0;
    std::int64_t param_count = 0;  // float32 elements in gradient_mb
    std::int64_t reference_shards = 4;  // M used for the model-size sweep
};

std::span<const ModelSpec> model_registry();
std::optional<ModelSpec> find_model(std::string_view name);

// Either a registry model or an ad-hoc size labelled "custom-<mb>mb".
ModelSpec model_for_size(double gradient_mb);

struct ExperimentConfig {
    std::string topology = "gradsharding";
    std::int64_t shards = 1;   // M
    std::int64_t clients = 20;  // N
    std::string model = "vgg16";
    std::optional<double> gradient_mb;  // overrides the model's size
    double read_mbps = 50.0;
    std::optional<double> write_mbps;  // unset: same as read_mbps
    double per_op_latency_s = 0.05;
    faas::PlatformLimits limits;
    econ::PriceSheet prices;
    double compute_mbps = 5225.0;
    bool cold_start = false;
    double cold_start_penalty_s = 3.0;
    std::optional<double> memory_mb;  // fixed aggregator allocation
    double timeout_s = 900.0;
    double materialize_threshold_mb = 64.0;
    std::int64_t repetitions = 1;
    std::uint64_t seed = 42;
    std::string output_dir = "results";

    // Throws ConfigError naming the first offending field.
    void validate() const;

    ModelSpec resolved_model() const;
    store::TransferModel transfer() const;
    topo::TopologyKind kind() const;
    topo::SimConfig sim_config() const;
};

// Strict JSON mapping: every key must be known, every value must have the
// right type. Missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

inline constexpr const char* kOutputDirEnv = "SHARDAGG_OUTPUT_DIR";

// Applies the output-directory environment override, if set.
void apply_environment(ExperimentConfig& c);

}  // namespace shardagg::cli
