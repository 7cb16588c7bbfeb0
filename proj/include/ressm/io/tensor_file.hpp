#pragma once

#include "ressm/core/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ressm::io {

/// On-disk layout, all integers and values little-endian:
///   "RSSM" | u32 version | u32 rank | u64 dims[rank] | f64 payload | u32 crc32
/// The payload is column-major and the CRC32 covers the payload bytes only.
inline constexpr std::uint32_t kTensorVersion = 1;

struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> values;  // column-major

  std::uint64_t element_count() const;
};

/// CRC32 (zlib polynomial) of a byte range.
std::uint32_t crc32(const void* data, std::size_t size);

/// Writes to a sibling temporary file, then renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

std::string encode_tensor(const Tensor& t);
/// Throws IoError naming `source` on a bad magic, version, length or CRC.
Tensor decode_tensor(const std::string& bytes, const std::string& source);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor to_tensor(const Matrix& m);
/// Rank-1 tensors become a column vector. Throws IoError for rank > 2.
Matrix to_matrix(const Tensor& t, const std::string& source);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// Stacks equally shaped matrices into a rows x cols x count tensor.
Tensor stack(const std::vector<Matrix>& mats);
std::vector<Matrix> unstack(const Tensor& t, const std::string& source);

}  // namespace ressm::io
