#pragma once

// 8-bit Netpbm rasters: binary PGM (P5, grayscale) and PPM (P6, RGB).

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mdrnn {

struct Raster {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t channels = 1;  ///< 1 (gray) or 3 (RGB)
    std::vector<std::uint8_t> pixels;  ///< row-major, channels interleaved

    friend bool operator==(const Raster&, const Raster&) = default;
};

/// Throws DataError for unreadable or malformed files, or maxval other than 255.
Raster read_pnm(const std::string& path);
/// Writes P5 for one channel, P6 for three.
void write_pnm(const std::string& path, const Raster& raster);

}  // namespace mdrnn
