// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "handact/nn/tensor.hpp"

namespace handact::nn {

// Binary layout, little endian:
//   "HNDACKPT" | u32 version | u32 count |
//   count x ( u32 name_len | name | u32 rank | rank x u64 extent | values as f64 )

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_parameters(const ParameterList& params);
/// Loads values by name; every listed parameter must be present with the same
/// shape. Extra entries in the blob are an error as well.
void deserialize_parameters(const std::string& blob, const ParameterList& params);

void save_checkpoint(const std::filesystem::path& path, const ParameterList& params);
void load_checkpoint(const std::filesystem::path& path, const ParameterList& params);

}  // namespace handact::nn
