#pragma once

#include "socsrl/netcore.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace socsrl {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Lower-case, zero-padded, 16 digits.
std::string hex64(std::uint64_t value);

/// Hash of the raw bytes of a parameter vector (layout included).
std::uint64_t hash_params(const ParamVector& params) noexcept;
std::uint64_t hash_network(const Network& net);

}  // namespace socsrl
