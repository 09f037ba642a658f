#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msftgcn/tensor.hpp"

namespace msftgcn {

// TNS1 container, little-endian:
//   bytes 0-3  magic "TNS1"
//   byte  4    dtype (1 = f32, 2 = f64)
//   byte  5    ndim
//   then ndim x u64 dims, then the row-major payload.
enum class Dtype : std::uint8_t { f32 = 1, f64 = 2 };

struct Tns1Header {
  Dtype dtype = Dtype::f64;
  std::vector<std::uint64_t> dims;
  std::size_t header_bytes = 0;
  std::size_t payload_bytes = 0;

  std::size_t record_bytes() const noexcept { return header_bytes + payload_bytes; }
};

struct Tns1Record {
  DenseTensor3 tensor;
  Tns1Header header;
};

std::string encode_tns1(const DenseTensor3& tensor, Dtype dtype = Dtype::f64);

// Parses the header at `offset` and checks that the full record fits in `bytes`.
Tns1Header parse_tns1_header(std::string_view bytes, std::size_t offset = 0);

// Decodes one record starting at `offset`; trailing bytes after it are allowed.
// Tensors with ndim < 3 get trailing unit dims.
Tns1Record decode_tns1_record(std::string_view bytes, std::size_t offset = 0,
                              std::optional<Dtype> expected = std::nullopt);

// Decodes a buffer holding exactly one record.
DenseTensor3 decode_tns1(std::string_view bytes, std::optional<Dtype> expected = std::nullopt);

void write_tns1(const std::filesystem::path& path, const DenseTensor3& tensor,
                Dtype dtype = Dtype::f64);
DenseTensor3 read_tns1(const std::filesystem::path& path,
                       std::optional<Dtype> expected = std::nullopt);

std::string read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace msftgcn
