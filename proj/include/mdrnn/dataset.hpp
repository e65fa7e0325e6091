#pragma once

// Labelled sequence datasets: MNIST pixel classification, seeded splits, and
// image + colour-coded labelmap pairs.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdrnn/grid.hpp"
#include "mdrnn/raster.hpp"

namespace mdrnn {

inline constexpr std::uint32_t kBackgroundClass = 10;
inline constexpr std::size_t kDigitTaskClasses = 11;

/// One training or evaluation sequence.
struct Sample {
    std::string id;
    SequenceND input;
    LabelGrid labels;
    int digit = -1;  ///< whole-image digit for MNIST samples, -1 otherwise
};

using PixelTask = Sample;
using Dataset = std::vector<Sample>;

/// Pixels brighter than `threshold` take the digit's class, the rest class 10.
/// Throws ConfigError for digit outside 0..9 or threshold outside [0,1).
PixelTask build_pixel_targets(const SequenceND& image, int digit, double threshold = 0.0);

/// Pairs an IDX image file with its label file. `limit` 0 loads everything.
Dataset load_mnist_pixel_task(const std::string& images_path, const std::string& labels_path, double threshold = 0.0,
                              std::size_t limit = 0);

/// Seeded shuffle of 0..count-1, then contiguous partition into `sizes`.
/// Throws DataError when the sizes exceed count.
std::vector<std::vector<std::size_t>> split_indices(std::size_t count, const std::vector<std::size_t>& sizes,
                                                    std::uint64_t seed);

std::vector<Dataset> split(const Dataset& dataset, const std::vector<std::size_t>& sizes, std::uint64_t seed);

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices);

struct PaletteEntry {
    std::uint32_t class_index = 0;
    std::array<std::uint8_t, 3> rgb{};
};

using Palette = std::vector<PaletteEntry>;

/// Text file of `class_index R G B` lines; '#' starts a comment.
Palette load_palette(const std::string& path);
void save_palette(const std::string& path, const Palette& palette);

/// RGB (or grayscale, replicated) inputs scaled to [0,1], width 3, and class
/// labels looked up from labelmap colours. Throws DataError for a colour not in
/// the palette, naming the colour and pixel.
std::pair<SequenceND, LabelGrid> load_labelmap_pair(const std::string& image_path, const std::string& labelmap_path,
                                                    const Palette& palette);
std::pair<SequenceND, LabelGrid> labelmap_pair_from_rasters(const Raster& image, const Raster& labelmap,
                                                            const Palette& palette);

/// Synthetic two-texture scene for texture-segmentation tests: an RGB image,
/// its colour-coded labelmap and the palette (classes 0 and 1).
struct TexturePair {
    Raster image;
    Raster labelmap;
    Palette palette;
};

TexturePair generate_texture_pair(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Reads a list file of `image_path labelmap_path` lines (relative paths are
/// resolved against the list file's directory) into a dataset.
Dataset load_labelmap_dataset(const std::string& list_path, const Palette& palette);

}  // namespace mdrnn
