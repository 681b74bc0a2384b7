#pragma once

#include <filesystem>
#include <span>

#include "shardagg/grad/tensor.hpp"

namespace shardagg::grad {

// Reference FedAvg: element-wise mean of Materialized tensors, summed in
// client-index order and divided once. Every topology is checked against it.
GradientTensor fedavg_flat(std::span<const GradientTensor> gradients);

// Largest element-wise relative error of `result` against `reference`.
// Each coordinate is scaled by max(|reference_j|, max_i |inputs_i[j]|), so a
// mean that cancels to nearly zero is judged against the magnitude of the
// values that were summed rather than against the tiny mean itself.
double max_relative_error(const GradientTensor& result, const GradientTensor& reference,
                          std::span<const GradientTensor> inputs);

// Golden vector files: 8-byte little-endian param count followed by the
// elements as little-endian IEEE-754 binary32.
void write_golden(const std::filesystem::path& path, const GradientTensor& tensor);
GradientTensor read_golden(const std::filesystem::path& path);

}  // namespace shardagg::grad
