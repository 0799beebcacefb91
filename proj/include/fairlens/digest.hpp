#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace fairlens {

// FNV-1a, used for provenance digests (model identity, input files).
uint64_t fnv1a(std::string_view data) noexcept;

std::string hex64(uint64_t value);

}  // namespace fairlens
