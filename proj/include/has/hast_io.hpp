#pragma once

// HAST tensor files:
//   "HAST" | version u8 = 1 | dtype u8 = 1 (f32) | rank u8 in {2,3} | reserved u8 = 0
//   | rank x u32 LE dims | product(dims) x f32 LE payload
// Rank 3 stores (H, W, C); rank 2 stores (T, C).

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "has/tensor.hpp"

namespace has {

inline constexpr std::uint8_t kHastVersion = 1;
inline constexpr std::uint8_t kHastDtypeF32 = 1;

using AnyTensor = std::variant<Tensor3, Tensor1>;

std::vector<std::uint8_t> encode_hast(const Tensor3& t);
std::vector<std::uint8_t> encode_hast(const Tensor1& t);
/// Throws FormatError for anything that is not a well-formed HAST payload.
AnyTensor decode_hast(std::span<const std::uint8_t> bytes);

AnyTensor read_tensor(const std::filesystem::path& path);
/// Convenience wrappers that also check the rank.
Tensor3 read_tensor3(const std::filesystem::path& path);
Tensor1 read_tensor1(const std::filesystem::path& path);

void write_tensor(const Tensor3& t, const std::filesystem::path& path);
void write_tensor(const Tensor1& t, const std::filesystem::path& path);

}  // namespace has
