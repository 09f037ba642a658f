#include "msftgcn/tns1.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "msftgcn/error.hpp"

namespace msftgcn {
namespace {

constexpr char kMagic[4] = {'T', 'N', 'S', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
  }
  return v;
}

std::size_t dtype_width(Dtype d) { return d == Dtype::f32 ? 4 : 8; }

}  // namespace

std::string encode_tns1(const DenseTensor3& tensor, Dtype dtype) {
  const Dims3 d = tensor.dims();
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(dtype));
  out.push_back(static_cast<char>(3));
  put_u64(out, d.d1);
  put_u64(out, d.d2);
  put_u64(out, d.d3);
  out.reserve(out.size() + tensor.size() * dtype_width(dtype));
  for (double v : tensor.values()) {
    if (dtype == Dtype::f64) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      put_u64(out, bits);
    } else {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }
  return out;
}

Tns1Header parse_tns1_header(std::string_view bytes, std::size_t offset) {
  if (bytes.size() < offset + 6) {
    throw FormatError("TNS1 truncated: need 6 header bytes, have " +
                          std::to_string(bytes.size() > offset ? bytes.size() - offset : 0),
                      bytes.size());
  }
  if (std::memcmp(bytes.data() + offset, kMagic, 4) != 0) {
    throw FormatError("bad TNS1 magic '" + std::string(bytes.substr(offset, 4)) + "'", offset);
  }
  Tns1Header h;
  const auto dtype_byte = static_cast<unsigned char>(bytes[offset + 4]);
  if (dtype_byte != 1 && dtype_byte != 2) {
    throw FormatError("unknown TNS1 dtype " + std::to_string(dtype_byte), offset + 4);
  }
  h.dtype = static_cast<Dtype>(dtype_byte);
  const auto ndim = static_cast<unsigned char>(bytes[offset + 5]);
  if (ndim == 0) throw FormatError("TNS1 ndim must be >= 1", offset + 5);
  const std::size_t dims_at = offset + 6;
  if (bytes.size() < dims_at + 8 * ndim) {
    throw FormatError("TNS1 truncated inside the dims block (" + std::to_string(ndim) + " dims)",
                      bytes.size());
  }
  std::uint64_t count = 1;
  for (std::size_t k = 0; k < ndim; ++k) {
    const std::uint64_t dim = get_u64(bytes, dims_at + 8 * k);
    if (dim != 0 && count > std::numeric_limits<std::uint64_t>::max() / 8 / dim) {
      throw FormatError("TNS1 dims overflow", dims_at + 8 * k);
    }
    count *= dim;
    h.dims.push_back(dim);
  }
  h.header_bytes = 6 + 8 * static_cast<std::size_t>(ndim);
  h.payload_bytes = static_cast<std::size_t>(count) * dtype_width(h.dtype);
  const std::size_t payload_at = offset + h.header_bytes;
  if (bytes.size() - payload_at < h.payload_bytes) {
    throw FormatError("TNS1 payload truncated: header dims need " +
                          std::to_string(h.payload_bytes) + " bytes, file has " +
                          std::to_string(bytes.size() - payload_at),
                      bytes.size());
  }
  return h;
}

Tns1Record decode_tns1_record(std::string_view bytes, std::size_t offset,
                              std::optional<Dtype> expected) {
  Tns1Header h = parse_tns1_header(bytes, offset);
  if (expected && *expected != h.dtype) {
    throw FormatError("TNS1 dtype mismatch: expected " +
                          std::to_string(static_cast<int>(*expected)) + ", found " +
                          std::to_string(static_cast<int>(h.dtype)),
                      offset + 4);
  }
  if (h.dims.size() > 3) {
    throw FormatError("TNS1 ndim " + std::to_string(h.dims.size()) +
                          " not supported for third-order tensors",
                      offset + 5);
  }
  Dims3 dims{1, 1, 1};
  if (h.dims.size() > 0) dims.d1 = h.dims[0];
  if (h.dims.size() > 1) dims.d2 = h.dims[1];
  if (h.dims.size() > 2) dims.d3 = h.dims[2];

  const std::size_t width = dtype_width(h.dtype);
  const std::size_t payload_at = offset + h.header_bytes;
  std::vector<double> values(dims.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::size_t at = payload_at + k * width;
    double v;
    if (h.dtype == Dtype::f64) {
      v = std::bit_cast<double>(get_u64(bytes, at));
    } else {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
      }
      v = static_cast<double>(std::bit_cast<float>(bits));
    }
    if (!std::isfinite(v)) throw FormatError("TNS1 payload holds a non-finite value", at);
    values[k] = v;
  }
  return {DenseTensor3(dims, std::move(values)), std::move(h)};
}

DenseTensor3 decode_tns1(std::string_view bytes, std::optional<Dtype> expected) {
  Tns1Header h = parse_tns1_header(bytes, 0);
  if (h.record_bytes() != bytes.size()) {
    throw FormatError("TNS1 size mismatch: header dims need " + std::to_string(h.payload_bytes) +
                          " payload bytes, file has " +
                          std::to_string(bytes.size() - h.header_bytes),
                      h.header_bytes);
  }
  return decode_tns1_record(bytes, 0, expected).tensor;
}

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path.string());
}

void write_tns1(const std::filesystem::path& path, const DenseTensor3& tensor, Dtype dtype) {
  write_file_bytes(path, encode_tns1(tensor, dtype));
}

DenseTensor3 read_tns1(const std::filesystem::path& path, std::optional<Dtype> expected) {
  return decode_tns1(read_file_bytes(path), expected);
}

}  // namespace msftgcn
