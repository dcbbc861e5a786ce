#include "has/hast_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "has/error.hpp"

namespace has {

namespace {

constexpr std::size_t kHeaderSize = 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> encode(std::span<const std::uint32_t> dims, std::span<const float> payload) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 * dims.size() + 4 * payload.size());
  for (char m : {'H', 'A', 'S', 'T'}) out.push_back(static_cast<std::uint8_t>(m));
  out.push_back(kHastVersion);
  out.push_back(kHastDtypeF32);
  out.push_back(static_cast<std::uint8_t>(dims.size()));
  out.push_back(0);
  for (auto d : dims) put_u32(out, d);
  for (float f : payload) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_hast(const Tensor3& t) {
  const std::uint32_t dims[] = {static_cast<std::uint32_t>(t.height()), static_cast<std::uint32_t>(t.width()),
                                static_cast<std::uint32_t>(t.channels())};
  return encode(dims, t.data());
}

std::vector<std::uint8_t> encode_hast(const Tensor1& t) {
  const std::uint32_t dims[] = {static_cast<std::uint32_t>(t.length()), static_cast<std::uint32_t>(t.channels())};
  return encode(dims, t.data());
}

AnyTensor decode_hast(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw FormatError("truncated header");
  if (!(bytes[0] == 'H' && bytes[1] == 'A' && bytes[2] == 'S' && bytes[3] == 'T')) {
    throw FormatError("bad magic");
  }
  if (bytes[4] != kHastVersion) throw FormatError("unsupported version " + std::to_string(bytes[4]));
  if (bytes[5] != kHastDtypeF32) throw FormatError("unsupported dtype " + std::to_string(bytes[5]));
  const std::size_t rank = bytes[6];
  if (rank != 2 && rank != 3) throw FormatError("unsupported rank " + std::to_string(rank));
  if (bytes[7] != 0) throw FormatError("reserved byte must be zero");
  if (bytes.size() < kHeaderSize + 4 * rank) throw FormatError("truncated dims");

  std::vector<std::uint32_t> dims(rank);
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    dims[i] = get_u32(bytes, kHeaderSize + 4 * i);
    if (dims[i] == 0 || dims[i] > 0x7FFFFFFFu) throw FormatError("dimension out of range");
    count *= dims[i];
    if (count > (std::uint64_t{1} << 40)) throw FormatError("tensor too large");
  }
  const std::size_t offset = kHeaderSize + 4 * rank;
  const std::uint64_t expected = offset + 4 * count;
  if (bytes.size() < expected) throw FormatError("truncated data");
  if (bytes.size() > expected) throw FormatError("trailing bytes after payload");

  std::vector<float> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes, offset + 4 * i));
    if (!std::isfinite(values[i])) throw FormatError("non-finite value at flat index " + std::to_string(i));
  }
  if (rank == 3) {
    return Tensor3::from_data(static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                              std::move(values));
  }
  return Tensor1::from_data(static_cast<int>(dims[0]), static_cast<int>(dims[1]), std::move(values));
}

AnyTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_hast(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Tensor3 read_tensor3(const std::filesystem::path& path) {
  auto t = read_tensor(path);
  if (auto* t3 = std::get_if<Tensor3>(&t)) return std::move(*t3);
  throw FormatError(path.string() + ": expected a rank-3 tensor");
}

Tensor1 read_tensor1(const std::filesystem::path& path) {
  auto t = read_tensor(path);
  if (auto* t1 = std::get_if<Tensor1>(&t)) return std::move(*t1);
  throw FormatError(path.string() + ": expected a rank-2 tensor");
}

namespace {

void write_bytes(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path.string());
}

}  // namespace

void write_tensor(const Tensor3& t, const std::filesystem::path& path) { write_bytes(encode_hast(t), path); }
void write_tensor(const Tensor1& t, const std::filesystem::path& path) { write_bytes(encode_hast(t), path); }

}  // namespace has
