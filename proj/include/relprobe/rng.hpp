#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace relprobe {

using Rng = std::mt19937_64;

// Stable 64-bit FNV-1a; std::hash is not stable across implementations.
std::uint64_t stable_hash(std::string_view text);

std::uint64_t splitmix64(std::uint64_t x);

// Seed for one task, a pure function of the master seed and the task key
// parts, so scheduling order never affects any output.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> key);

}  // namespace relprobe
