#include "advrecon/core/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "advrecon/core/error.hpp"

namespace advrecon {
namespace {

constexpr char kMagic[4] = {'A', 'D', 'V', 'R'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void need(std::uint64_t n, const char* what) const {
    if (n > bytes_.size() - pos_) throw FormatError(std::string("truncated ") + what, pos_);
  }

  std::size_t pos() const noexcept { return pos_; }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void Container::put(std::string name, Tensor value) {
  for (auto& [n, t] : entries)
    if (n == name) {
      t = std::move(value);
      return;
    }
  entries.emplace_back(std::move(name), std::move(value));
}

bool Container::contains(const std::string& name) const {
  for (const auto& e : entries)
    if (e.first == name) return true;
  return false;
}

const Tensor& Container::get(const std::string& name) const {
  for (const auto& e : entries)
    if (e.first == name) return e.second;
  throw FormatError("container has no entry '" + name + "'", 0);
}

std::vector<std::uint8_t> encode_container(const Container& c) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.metadata.size()));
  out.insert(out.end(), c.metadata.begin(), c.metadata.end());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.entries.size()));
  for (const auto& [name, t] : c.entries) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.values()) put_le<double>(out, v);
  }
  return out;
}

Container decode_container(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad container magic", 0);
  r.string(4, "magic");
  const std::size_t version_at = r.pos();
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion)
    throw FormatError("unsupported container version " + std::to_string(version), version_at);
  Container c;
  const auto meta_len = r.get<std::uint32_t>("metadata length");
  c.metadata = r.string(meta_len, "metadata");
  const auto count = r.get<std::uint32_t>("entry count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = r.get<std::uint32_t>("entry name length");
    std::string name = r.string(name_len, "entry name");
    const std::size_t rank_at = r.pos();
    const auto rank = r.get<std::uint32_t>("entry rank");
    if (rank > 8) throw FormatError("implausible tensor rank " + std::to_string(rank), rank_at);
    Shape shape(rank);
    std::uint64_t total = 1;
    for (auto& d : shape) {
      const std::size_t dim_at = r.pos();
      const auto dim = r.get<std::uint64_t>("entry dimension");
      if (dim != 0 && total > (std::uint64_t{1} << 40) / dim)
        throw FormatError("tensor too large", dim_at);
      total *= dim;
      d = static_cast<std::size_t>(dim);
    }
    r.need(total * sizeof(double), "entry data");
    std::vector<double> data(total);
    for (auto& v : data) v = r.get<double>("entry data");
    c.entries.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw FormatError("trailing bytes after last entry", r.pos());
  return c;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_container(const std::filesystem::path& path, const Container& c) {
  write_file_bytes(path, encode_container(c));
}

Container read_container(const std::filesystem::path& path) {
  return decode_container(read_file_bytes(path));
}

}  // namespace advrecon
