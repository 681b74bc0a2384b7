#include "shardagg/grad/fedavg.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "shardagg/errors.hpp"

namespace shardagg::grad {

GradientTensor fedavg_flat(std::span<const GradientTensor> gradients) {
    if (gradients.empty()) {
        throw InvalidArgument("fedavg of an empty client list");
    }
    const std::int64_t n = gradients.front().param_count();
    std::vector<float> sum(static_cast<std::size_t>(n), 0.0f);
    for (const auto& g : gradients) {
        if (g.param_count() != n) {
            throw InvalidArgument("fedavg over tensors of different sizes");
        }
        auto v = g.values();
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += v[i];
        }
    }
    const float count = static_cast<float>(gradients.size());
    for (auto& s : sum) {
        s /= count;
    }
    return GradientTensor::materialized(std::move(sum));
}

double max_relative_error(const GradientTensor& result, const GradientTensor& reference,
                          std::span<const GradientTensor> inputs) {
    if (result.param_count() != reference.param_count()) {
        throw InvalidArgument("relative error between tensors of different sizes");
    }
    auto a = result.values();
    auto b = reference.values();
    std::vector<float> scale(b.size());
    for (std::size_t j = 0; j < b.size(); ++j) scale[j] = std::fabs(b[j]);
    for (const auto& g : inputs) {
        auto v = g.values();
        if (v.size() != scale.size()) throw InvalidArgument("input size differs from reference");
        for (std::size_t j = 0; j < v.size(); ++j) scale[j] = std::max(scale[j], std::fabs(v[j]));
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = std::fabs(static_cast<double>(a[j]) - static_cast<double>(b[j]));
        if (diff == 0.0) continue;
        const double denom = scale[j] > 0.0f ? static_cast<double>(scale[j]) : 1.0;
        worst = std::max(worst, diff / denom);
    }
    return worst;
}

namespace {

static_assert(sizeof(float) == 4);

template <typename T>
T to_little_endian(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<std::byte, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

}  // namespace

void write_golden(const std::filesystem::path& path, const GradientTensor& tensor) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InvalidArgument("cannot open golden file for writing: " + path.string());
    }
    const auto count = to_little_endian(static_cast<std::uint64_t>(tensor.param_count()));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (float v : tensor.values()) {
        const auto bits = to_little_endian(std::bit_cast<std::uint32_t>(v));
        out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
    if (!out) {
        throw InvalidArgument("short write to golden file: " + path.string());
    }
}

GradientTensor read_golden(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFound("golden file not found: " + path.string());
    }
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (!in) {
        throw InvalidArgument("truncated golden header: " + path.string());
    }
    count = to_little_endian(count);
    std::vector<float> values(count);
    for (auto& v : values) {
        std::uint32_t bits = 0;
        in.read(reinterpret_cast<char*>(&bits), sizeof(bits));
        if (!in) {
            throw InvalidArgument("truncated golden payload: " + path.string());
        }
        v = std::bit_cast<float>(to_little_endian(bits));
    }
    return GradientTensor::materialized(std::move(values));
}

}  // namespace shardagg::grad
