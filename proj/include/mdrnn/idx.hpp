#pragma once

// IDX container used by the MNIST distribution:
//   bytes 0-1   zero
//   byte  2     element type (0x08 u8, 0x09 i8, 0x0B i16, 0x0C i32, 0x0D f32, 0x0E f64)
//   byte  3     rank
//   4*rank      big-endian u32 dimensions
//   payload     product(dims) elements, big-endian

#include <cstdint>
#include <string>
#include <vector>

#include "mdrnn/grid.hpp"

namespace mdrnn {

struct IdxFile {
    std::uint8_t type_code = 0x08;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> payload;

    std::size_t element_count() const;
    friend bool operator==(const IdxFile&, const IdxFile&) = default;
};

/// Element size in bytes for an IDX type code; throws ParseError(offset 2) for unknown codes.
std::size_t idx_element_size(std::uint8_t type_code);

/// Throws ParseError carrying the offending byte offset.
IdxFile parse_idx(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_idx(const IdxFile& file);

IdxFile read_idx(const std::string& path);
void write_idx(const std::string& path, const IdxFile& file);

/// Rank-3 unsigned-byte file as one 2D sequence (width 1) per image, scaled by 1/255.
std::vector<SequenceND> load_idx_images(const std::string& path);
std::vector<SequenceND> idx_to_images(const IdxFile& file);
/// Rank-1 unsigned-byte file.
std::vector<std::uint8_t> load_idx_labels(const std::string& path);
std::vector<std::uint8_t> idx_to_labels(const IdxFile& file);

/// Inverse of idx_to_images: values are rounded back to bytes (v * 255).
IdxFile images_to_idx(const std::vector<SequenceND>& images);

}  // namespace mdrnn
