#include "advrecon/signals/idx.hpp"

#include "advrecon/core/container.hpp"
#include "advrecon/core/error.hpp"

namespace advrecon::signals {
namespace {

constexpr std::uint8_t kUnsignedByte = 0x08;

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  if (at + 4 > b.size()) throw FormatError("truncated IDX header", b.size());
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

// Validates the magic and returns the dimension list; payload starts right after.
std::vector<std::uint32_t> read_header(const std::vector<std::uint8_t>& b, std::uint8_t ndims,
                                       const char* what) {
  const std::uint32_t magic = read_be32(b, 0);
  const std::uint32_t expected = (std::uint32_t{kUnsignedByte} << 8) | ndims;
  if (magic != expected)
    throw FormatError(std::string("bad IDX magic for ") + what, 0);
  std::vector<std::uint32_t> dims(ndims);
  for (std::size_t d = 0; d < ndims; ++d) dims[d] = read_be32(b, 4 + 4 * d);
  return dims;
}

void check_payload(const std::vector<std::uint8_t>& b, std::size_t offset, std::uint64_t expected) {
  const std::uint64_t available = b.size() - offset;
  if (available < expected) throw FormatError("truncated IDX payload", b.size());
  if (available > expected) throw FormatError("trailing bytes after IDX payload", offset + expected);
}

}  // namespace

IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes) {
  const auto dims = read_header(bytes, 3, "images");
  const std::size_t offset = 16;
  IdxImages out;
  out.rows = dims[1];
  out.cols = dims[2];
  const std::uint64_t pixels = std::uint64_t{out.rows} * out.cols;
  if (pixels == 0) throw FormatError("IDX image dimensions must be nonzero", 8);
  check_payload(bytes, offset, std::uint64_t{dims[0]} * pixels);
  out.images.reserve(dims[0]);
  for (std::size_t k = 0; k < dims[0]; ++k) {
    Tensor img = Tensor::zeros(pixels);
    const std::uint8_t* src = bytes.data() + offset + k * pixels;
    for (std::size_t i = 0; i < pixels; ++i) img[i] = src[i] / 255.0;
    out.images.push_back(std::move(img));
  }
  return out;
}

std::vector<int> parse_idx_labels(const std::vector<std::uint8_t>& bytes) {
  const auto dims = read_header(bytes, 1, "labels");
  const std::size_t offset = 8;
  check_payload(bytes, offset, dims[0]);
  return std::vector<int>(bytes.begin() + offset, bytes.end());
}

IdxImages load_idx_images(const std::filesystem::path& path) {
  return parse_idx_images(read_file_bytes(path));
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  return parse_idx_labels(read_file_bytes(path));
}

IdxData load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels) {
  IdxData data;
  data.images = load_idx_images(images);
  if (labels) {
    auto l = load_idx_labels(*labels);
    if (l.size() != data.images.images.size())
      throw FormatError("label count " + std::to_string(l.size()) + " differs from image count " +
                            std::to_string(data.images.images.size()),
                        4);
    data.labels = std::move(l);
  }
  return data;
}

std::vector<std::uint8_t> encode_idx_images(std::size_t count, std::size_t rows, std::size_t cols,
                                             const std::vector<std::uint8_t>& pixels) {
  expects(pixels.size() == count * rows * cols, "encode_idx_images: pixel count mismatch");
  std::vector<std::uint8_t> out;
  put_be32(out, 0x00000803);
  put_be32(out, static_cast<std::uint32_t>(count));
  put_be32(out, static_cast<std::uint32_t>(rows));
  put_be32(out, static_cast<std::uint32_t>(cols));
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, 0x00000801);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

}  // namespace advrecon::signals
