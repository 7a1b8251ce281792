#include "socsrl/hashing.hpp"
#include "socsrl/trainer.hpp"

#include <cstdio>

namespace socsrl {

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t basis) noexcept {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = basis;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text) noexcept { return fnv1a64(text.data(), text.size()); }

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t hash_params(const ParamVector& params) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& l : params.layout) {
    const std::uint64_t fields[3] = {l.in_dim, l.out_dim, static_cast<std::uint64_t>(l.activation)};
    h = fnv1a64(fields, sizeof fields, h);
  }
  return fnv1a64(params.values.data(), params.values.size() * sizeof(double), h);
}

std::uint64_t hash_network(const Network& net) { return hash_params(to_params(net)); }

std::string config_hash(const TrainConfig& config) { return hex64(fnv1a64(to_json(config).dump())); }

}  // namespace socsrl
