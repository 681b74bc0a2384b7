#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace shardagg::grad {

inline constexpr std::int64_t kBytesPerParam = 4;
inline constexpr double kBytesPerMB = 1024.0 * 1024.0;

// Number of float32 parameters that occupy `mb` megabytes (1 MB = 2^20 B).
std::int64_t params_for_mb(double mb);
double mb_for_params(std::int64_t params);

// A client gradient update. Either Materialized (owns float32 elements) or
// Phantom (size only, used to simulate multi-GB models without allocating).
//
// Values are immutable once constructed; copies share the underlying
// storage, so a tensor can be handed across threads and stored in several
// places at no cost. Shards produced by shard() are views on the parent's
// storage.
class GradientTensor {
public:
    GradientTensor() = default;

    static GradientTensor materialized(std::vector<float> values, std::uint64_t seed = 0);
    static GradientTensor phantom(std::int64_t param_count);
    static GradientTensor phantom_mb(double mb);

    // Seeded uniform(-1, 1) elements. Generation is bit-reproducible across
    // platforms (no std distributions involved).
    static GradientTensor random_uniform(std::int64_t param_count, std::uint64_t seed);

    std::int64_t param_count() const { return param_count_; }
    std::int64_t byte_size() const { return param_count_ * kBytesPerParam; }
    double size_mb() const { return static_cast<double>(byte_size()) / kBytesPerMB; }
    std::uint64_t seed() const { return seed_; }

    bool is_phantom() const { return storage_ == nullptr; }
    bool is_materialized() const { return storage_ != nullptr; }

    // Element access. Throws InvalidArgument on a Phantom tensor.
    std::span<const float> values() const;

    // Zero-copy view of [begin, end). Phantom in, Phantom out.
    GradientTensor slice(std::int64_t begin, std::int64_t end) const;

    // Same payload kind, same size and, when Materialized, the same bit
    // patterns element by element.
    bool bit_identical(const GradientTensor& other) const;

private:
    std::shared_ptr<const std::vector<float>> storage_;
    std::int64_t offset_ = 0;
    std::int64_t param_count_ = 0;
    std::uint64_t seed_ = 0;
};

}  // namespace shardagg::grad
