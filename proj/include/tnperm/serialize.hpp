#pragma once

#include <filesystem>

#include <json.hpp>

#include "tnperm/oracle.hpp"
#include "tnperm/tensor_core.hpp"

namespace tnperm {

/// {d, mode, perm, dims, bonds, cores}; cores[i] is a nested
/// [left][phys][right] array. Doubles are written in shortest round-trip form.
nlohmann::json to_json(const CoreStack& stack);
CoreStack core_stack_from_json(const nlohmann::json& j);

/// {d, r, beta, tau, J}
nlohmann::json to_json(const PottsSpec& spec);
PottsSpec potts_spec_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace tnperm
