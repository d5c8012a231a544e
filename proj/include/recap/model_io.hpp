#pragma once

#include <filesystem>
#include <variant>

#include "recap/prototype.hpp"
#include "recap/ridge.hpp"

namespace recap {

// "RCAP" container, little-endian, trailing FNV-1a checksum over everything
// before it. Reservoir weights are stored as seed + spec and regenerated on
// load; templates are stored bit-packed; continuous prototype states are an
// optional block for resumable training. Layout is documented in README.md.

enum class ModelKind : std::uint16_t { recap = 1, ridge = 2 };

using LoadedModel = std::variant<RecapModel, EsnRidgeModel>;

void save_model(const RecapModel& model, const std::filesystem::path& path,
                bool include_states = false);
void save_model(const EsnRidgeModel& model, const std::filesystem::path& path);

// Validates magic, format version and checksum; rebuilds reservoir weights
// from the stored seed. Throws DataError on any mismatch.
LoadedModel load_model(const std::filesystem::path& path);

ModelKind peek_model_kind(const std::filesystem::path& path);

}  // namespace recap
