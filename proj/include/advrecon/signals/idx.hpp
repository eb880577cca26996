#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "advrecon/core/tensor.hpp"

namespace advrecon::signals {

/// Images from an IDX file (magic 0x00000803, unsigned bytes), scaled to
/// [0, 1] and flattened row-major to length rows * cols.
struct IdxImages {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Tensor> images;
};

struct IdxData {
  IdxImages images;
  std::optional<std::vector<int>> labels;
};

// All parsers throw FormatError with the offending byte offset; nothing is
// returned for a malformed or truncated file.
IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes);
std::vector<int> parse_idx_labels(const std::vector<std::uint8_t>& bytes);

IdxImages load_idx_images(const std::filesystem::path& path);
std::vector<int> load_idx_labels(const std::filesystem::path& path);
IdxData load_idx(const std::filesystem::path& images,
                 const std::optional<std::filesystem::path>& labels = std::nullopt);

std::vector<std::uint8_t> encode_idx_images(std::size_t count, std::size_t rows, std::size_t cols,
                                             const std::vector<std::uint8_t>& pixels);
std::vector<std::uint8_t> encode_idx_labels(const std::vector<std::uint8_t>& labels);

}  // namespace advrecon::signals
