#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "advrecon/core/tensor.hpp"

namespace advrecon {

/// Named tensors plus a JSON metadata string, stored in one binary file.
///
/// Layout (all integers little-endian, doubles as IEEE-754 binary64 LE):
///   "ADVR" | u32 version=1 | u32 meta_len | meta bytes |
///   u32 count | count x { u32 name_len | name | u32 rank | u64 dims[rank] |
///                         f64 data[prod(dims)] }
/// See docs/FORMATS.md.
struct Container {
  std::string metadata = "{}";
  std::vector<std::pair<std::string, Tensor>> entries;

  void put(std::string name, Tensor value);
  bool contains(const std::string& name) const;
  // Throws FormatError (offset 0) if the entry is missing.
  const Tensor& get(const std::string& name) const;
};

std::vector<std::uint8_t> encode_container(const Container& c);
// Throws FormatError with the byte offset of the first inconsistency.
Container decode_container(const std::vector<std::uint8_t>& bytes);

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace advrecon
