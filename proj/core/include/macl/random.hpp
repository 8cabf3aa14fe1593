#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace macl {

using Rng = std::mt19937_64;

/// Child seed for a named stream. Distinct names give independent streams
/// from one root seed, so each subcommand or phase reproduces on its own.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

inline Rng make_rng(std::uint64_t root, std::string_view stream) { return Rng(derive_seed(root, stream)); }

}  // namespace macl
