#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace covsel::rng {

/// Algorithm identifier recorded in output metadata. Substream seeds come
/// from splitmix64, the engine is the standard mt19937_64, and normal
/// variates use the polar method, so results are bit-stable across
/// platforms and independent of thread scheduling.
inline constexpr const char* kAlgorithm = "splitmix64+mt19937_64+polar-normal";

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for the `index`-th substream of `seed`. Distinct indices give
/// decorrelated streams; derive() may be nested to build stream trees.
std::uint64_t derive(std::uint64_t seed, std::uint64_t index);

/// FNV-1a of a label, for keying substreams by dataset id.
std::uint64_t hash_label(std::string_view label);

std::mt19937_64 engine(std::uint64_t seed);

/// Uniform on [0,1) with 53 random bits.
double uniform01(std::mt19937_64& eng);

/// Standard normal via the polar method (no reliance on the
/// implementation-defined std::normal_distribution).
double standard_normal(std::mt19937_64& eng);

/// Unbiased integer in [0, n) by rejection.
int uniform_int(std::mt19937_64& eng, int n);

/// n draws with replacement from [0, n).
std::vector<int> sample_with_replacement(std::mt19937_64& eng, int n);

/// Fisher-Yates permutation of [0, n).
std::vector<int> shuffled_indices(std::mt19937_64& eng, int n);

}  // namespace covsel::rng
