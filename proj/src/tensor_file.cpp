#include "ressm/io/tensor_file.hpp"

#include "ressm/core/error.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace ressm::io {
namespace {

constexpr char kMagic[4] = {'R', 'S', 'S', 'M'};

template <typename T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t k = 0; k < sizeof(T) / 2; ++k) std::swap(b[k], b[sizeof(T) - 1 - k]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::string& out, T v) {
  v = byteswap_if_big(v);
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw IoError(source_ + ": truncated while reading " + what);
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return byteswap_if_big(v);
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t Tensor::element_count() const {
  std::uint64_t n = 1;
  for (const auto d : dims) n *= d;
  return n;
}

std::uint32_t crc32(const void* data, std::size_t size) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(data);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = ::crc32(crc, p, chunk);
    p += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError(tmp.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError(path.string() + ": rename failed: " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_tensor(const Tensor& t) {
  if (t.values.size() != t.element_count()) {
    throw IoError("encode_tensor: value count does not match dims");
  }
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kTensorVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
  for (const auto d : t.dims) put<std::uint64_t>(out, d);
  const std::size_t payload_start = out.size();
  out.reserve(out.size() + 8 * t.values.size() + 4);
  if constexpr (std::endian::native == std::endian::little) {
    out.append(reinterpret_cast<const char*>(t.values.data()), 8 * t.values.size());
  } else {
    for (const double v : t.values) put(out, std::bit_cast<std::uint64_t>(v));
  }
  put<std::uint32_t>(out, crc32(out.data() + payload_start, out.size() - payload_start));
  return out;
}

Tensor decode_tensor(const std::string& bytes, const std::string& source) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError(source + ": not a tensor file (bad magic)");
  }
  Reader rd(bytes, source);
  rd.get<std::uint32_t>("magic");
  const auto version = rd.get<std::uint32_t>("version");
  if (version != kTensorVersion) {
    throw IoError(source + ": unsupported tensor version " + std::to_string(version));
  }
  const auto rank = rd.get<std::uint32_t>("rank");
  Tensor t;
  for (std::uint32_t k = 0; k < rank; ++k) t.dims.push_back(rd.get<std::uint64_t>("dims"));
  const std::uint64_t count = t.element_count();
  if (rd.remaining() != 8 * count + 4) {
    throw IoError(source + ": payload length " + std::to_string(rd.remaining()) +
                  " does not match dims (expected " + std::to_string(8 * count + 4) + ")");
  }
  const std::size_t payload_start = rd.pos();
  t.values.resize(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    t.values[k] = std::bit_cast<double>(rd.get<std::uint64_t>("payload"));
  }
  const auto stored = rd.get<std::uint32_t>("crc");
  if (stored != crc32(bytes.data() + payload_start, 8 * count)) {
    throw IoError(source + ": CRC mismatch");
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  write_file_atomic(path, encode_tensor(t));
}

Tensor read_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_file(path), path.string());
}

Tensor to_tensor(const Matrix& m) {
  Tensor t;
  t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  t.values.assign(m.data(), m.data() + m.size());
  return t;
}

Matrix to_matrix(const Tensor& t, const std::string& source) {
  if (t.dims.size() > 2) {
    throw IoError(source + ": expected a matrix, got rank " + std::to_string(t.dims.size()));
  }
  const auto rows = static_cast<Index>(t.dims.empty() ? 1 : t.dims[0]);
  const auto cols = static_cast<Index>(t.dims.size() == 2 ? t.dims[1] : 1);
  return Eigen::Map<const Matrix>(t.values.data(), rows, cols);
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  write_tensor(path, to_tensor(m));
}

Matrix read_matrix(const std::filesystem::path& path) {
  return to_matrix(read_tensor(path), path.string());
}

Tensor stack(const std::vector<Matrix>& mats) {
  Tensor t;
  const auto rows = mats.empty() ? 0 : mats[0].rows();
  const auto cols = mats.empty() ? 0 : mats[0].cols();
  t.dims = {static_cast<std::uint64_t>(rows), static_cast<std::uint64_t>(cols),
            static_cast<std::uint64_t>(mats.size())};
  t.values.reserve(t.element_count());
  for (const auto& m : mats) {
    if (m.rows() != rows || m.cols() != cols) throw IoError("stack: shape mismatch");
    t.values.insert(t.values.end(), m.data(), m.data() + m.size());
  }
  return t;
}

std::vector<Matrix> unstack(const Tensor& t, const std::string& source) {
  if (t.dims.size() != 3) {
    throw IoError(source + ": expected a rank-3 stack, got rank " +
                  std::to_string(t.dims.size()));
  }
  const auto rows = static_cast<Index>(t.dims[0]);
  const auto cols = static_cast<Index>(t.dims[1]);
  std::vector<Matrix> out;
  for (std::uint64_t k = 0; k < t.dims[2]; ++k) {
    out.emplace_back(Eigen::Map<const Matrix>(t.values.data() + k * rows * cols, rows, cols));
  }
  return out;
}

}  // namespace ressm::io
