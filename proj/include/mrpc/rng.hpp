#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mrpc {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Stable seed for an independent stream keyed by (master, keys...).
/// The result depends only on the values, never on call order or threading.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept;

}  // namespace mrpc
