#include "mdrnn/idx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "mdrnn/errors.hpp"

namespace mdrnn {

std::size_t IdxFile::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::size_t idx_element_size(std::uint8_t type_code) {
    switch (type_code) {
        case 0x08:
        case 0x09: return 1;
        case 0x0B: return 2;
        case 0x0C:
        case 0x0D: return 4;
        case 0x0E: return 8;
        default: throw ParseError("unknown IDX element type code " + std::to_string(type_code), 2);
    }
}

IdxFile parse_idx(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw ParseError("IDX header incomplete: file has " + std::to_string(bytes.size()) + " bytes", bytes.size());
    if (bytes[0] != 0 || bytes[1] != 0) throw ParseError("bad IDX magic: first two bytes must be zero", bytes[0] != 0 ? 0 : 1);
    IdxFile file;
    file.type_code = bytes[2];
    const std::size_t element = idx_element_size(file.type_code);
    const std::size_t rank = bytes[3];
    if (rank == 0) throw ParseError("IDX rank must be positive", 3);
    const std::size_t header = 4 + 4 * rank;
    if (bytes.size() < header) throw ParseError("IDX dimension block truncated", bytes.size());
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        const std::size_t at = 4 + 4 * i;
        const std::uint32_t d = (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
                                (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
        file.dims.push_back(d);
        count *= d;
    }
    const std::size_t expected = count * element;
    if (bytes.size() - header < expected)
        throw ParseError("IDX payload truncated: expected " + std::to_string(expected) + " bytes, found " +
                             std::to_string(bytes.size() - header),
                         bytes.size());
    if (bytes.size() - header > expected) throw ParseError("IDX file has trailing bytes", header + expected);
    file.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return file;
}

std::vector<std::uint8_t> encode_idx(const IdxFile& file) {
    if (file.dims.empty() || file.dims.size() > 255) throw ConfigError("IDX rank must be in 1..255");
    if (file.payload.size() != file.element_count() * idx_element_size(file.type_code))
        throw ConfigError("IDX payload length does not match its dimensions");
    std::vector<std::uint8_t> out = {0, 0, file.type_code, static_cast<std::uint8_t>(file.dims.size())};
    for (auto d : file.dims)
        for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(d >> shift));
    out.insert(out.end(), file.payload.begin(), file.payload.end());
    return out;
}

IdxFile read_idx(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_idx(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.offset());
    }
}

void write_idx(const std::string& path, const IdxFile& file) {
    const auto bytes = encode_idx(file);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + path);
}

std::vector<SequenceND> idx_to_images(const IdxFile& file) {
    if (file.type_code != 0x08) throw ParseError("image file must hold unsigned bytes (type 0x08)", 2);
    if (file.dims.size() != 3) throw ParseError("image file must have rank 3, found " + std::to_string(file.dims.size()), 3);
    const std::size_t rows = file.dims[1], cols = file.dims[2];
    if (rows == 0 || cols == 0) throw ParseError("image file has an empty image dimension", 8);
    const Shape shape{rows, cols};
    std::vector<SequenceND> images;
    images.reserve(file.dims[0]);
    for (std::size_t i = 0; i < file.dims[0]; ++i) {
        std::vector<double> values(rows * cols);
        const std::uint8_t* src = file.payload.data() + i * rows * cols;
        for (std::size_t p = 0; p < values.size(); ++p) values[p] = src[p] / 255.0;
        images.emplace_back(shape, 1, std::move(values));
    }
    return images;
}

std::vector<SequenceND> load_idx_images(const std::string& path) {
    const IdxFile file = read_idx(path);
    try {
        return idx_to_images(file);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.offset());
    }
}

std::vector<std::uint8_t> idx_to_labels(const IdxFile& file) {
    if (file.type_code != 0x08) throw ParseError("label file must hold unsigned bytes (type 0x08)", 2);
    if (file.dims.size() != 1) throw ParseError("label file must have rank 1, found " + std::to_string(file.dims.size()), 3);
    return file.payload;
}

std::vector<std::uint8_t> load_idx_labels(const std::string& path) {
    const IdxFile file = read_idx(path);
    try {
        return idx_to_labels(file);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.offset());
    }
}

IdxFile images_to_idx(const std::vector<SequenceND>& images) {
    if (images.empty()) throw DataError("no images to encode");
    const Shape& shape = images.front().shape();
    if (shape.rank() != 2) throw ConfigError("IDX images must be two-dimensional");
    IdxFile file{0x08, {static_cast<std::uint32_t>(images.size()), static_cast<std::uint32_t>(shape[0]),
                        static_cast<std::uint32_t>(shape[1])}, {}};
    file.payload.reserve(images.size() * shape.point_count());
    for (const auto& image : images) {
        if (!(image.shape() == shape) || image.width() != 1) throw ConfigError("IDX images must share one shape");
        for (double v : image.values())
            file.payload.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    }
    return file;
}

}  // namespace mdrnn
