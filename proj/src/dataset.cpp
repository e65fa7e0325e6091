#include "mdrnn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "mdrnn/errors.hpp"
#include "mdrnn/idx.hpp"

namespace mdrnn {

PixelTask build_pixel_targets(const SequenceND& image, int digit, double threshold) {
    if (digit < 0 || digit > 9) throw ConfigError("digit must be in 0..9, got " + std::to_string(digit));
    if (!(threshold >= 0.0 && threshold < 1.0)) throw ConfigError("foreground threshold must be in [0,1)");
    if (image.width() != 1) throw ConfigError("pixel targets need a single-channel image");
    std::vector<std::uint32_t> labels(image.point_count());
    for (std::size_t p = 0; p < labels.size(); ++p)
        labels[p] = image.at(p)[0] > threshold ? static_cast<std::uint32_t>(digit) : kBackgroundClass;
    return {"", image, LabelGrid(image.shape(), kDigitTaskClasses, std::move(labels)), digit};
}

Dataset load_mnist_pixel_task(const std::string& images_path, const std::string& labels_path, double threshold,
                              std::size_t limit) {
    auto images = load_idx_images(images_path);
    const auto labels = load_idx_labels(labels_path);
    if (images.size() != labels.size())
        throw DataError(images_path + " holds " + std::to_string(images.size()) + " images but " + labels_path +
                        " holds " + std::to_string(labels.size()) + " labels");
    const std::size_t count = limit == 0 ? images.size() : std::min(limit, images.size());
    Dataset out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (labels[i] > 9)
            throw DataError(labels_path + ": label " + std::to_string(labels[i]) + " of item " + std::to_string(i) +
                            " is not a digit");
        auto sample = build_pixel_targets(images[i], labels[i], threshold);
        sample.id = "mnist:" + std::to_string(i);
        out.push_back(std::move(sample));
    }
    return out;
}

std::vector<std::vector<std::size_t>> split_indices(std::size_t count, const std::vector<std::size_t>& sizes,
                                                    std::uint64_t seed) {
    const std::size_t wanted = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    if (wanted > count)
        throw DataError("split sizes total " + std::to_string(wanted) + " but the dataset has " +
                        std::to_string(count) + " items");
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> out;
    std::size_t at = 0;
    for (std::size_t size : sizes) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                         order.begin() + static_cast<std::ptrdiff_t>(at + size));
        at += size;
    }
    return out;
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(dataset.at(i));
    return out;
}

std::vector<Dataset> split(const Dataset& dataset, const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    std::vector<Dataset> out;
    for (const auto& part : split_indices(dataset.size(), sizes, seed)) out.push_back(subset(dataset, part));
    return out;
}

Palette load_palette(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open palette " + path);
    Palette palette;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        long cls, r, g, b;
        if (!(fields >> cls)) continue;
        if (!(fields >> r >> g >> b) || cls < 0 || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected `class_index R G B` with 0..255 colours");
        palette.push_back({static_cast<std::uint32_t>(cls),
                           {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)}});
    }
    if (palette.empty()) throw DataError("palette " + path + " has no entries");
    return palette;
}

void save_palette(const std::string& path, const Palette& palette) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write palette " + path);
    for (const auto& e : palette)
        out << e.class_index << ' ' << int(e.rgb[0]) << ' ' << int(e.rgb[1]) << ' ' << int(e.rgb[2]) << '\n';
}

std::pair<SequenceND, LabelGrid> labelmap_pair_from_rasters(const Raster& image, const Raster& labelmap,
                                                            const Palette& palette) {
    if (image.rows != labelmap.rows || image.cols != labelmap.cols)
        throw DataError("image and labelmap sizes differ");
    if (palette.empty()) throw DataError("empty palette");
    const Shape shape{image.rows, image.cols};
    std::vector<double> inputs(shape.point_count() * 3);
    for (std::size_t p = 0; p < shape.point_count(); ++p)
        for (std::size_t c = 0; c < 3; ++c)
            inputs[p * 3 + c] = image.pixels[p * image.channels + (image.channels == 3 ? c : 0)] / 255.0;

    std::uint32_t num_classes = 0;
    for (const auto& e : palette) num_classes = std::max(num_classes, e.class_index + 1);
    std::vector<std::uint32_t> labels(shape.point_count());
    for (std::size_t p = 0; p < shape.point_count(); ++p) {
        std::array<std::uint8_t, 3> rgb{};
        for (std::size_t c = 0; c < 3; ++c) rgb[c] = labelmap.pixels[p * labelmap.channels + (labelmap.channels == 3 ? c : 0)];
        auto it = std::find_if(palette.begin(), palette.end(), [&](const PaletteEntry& e) { return e.rgb == rgb; });
        if (it == palette.end())
            throw DataError("labelmap colour (" + std::to_string(rgb[0]) + "," + std::to_string(rgb[1]) + "," +
                            std::to_string(rgb[2]) + ") at pixel (" + std::to_string(p / shape[1]) + "," +
                            std::to_string(p % shape[1]) + ") is not in the palette");
        labels[p] = it->class_index;
    }
    return {SequenceND(shape, 3, std::move(inputs)), LabelGrid(shape, num_classes, std::move(labels))};
}

std::pair<SequenceND, LabelGrid> load_labelmap_pair(const std::string& image_path, const std::string& labelmap_path,
                                                    const Palette& palette) {
    return labelmap_pair_from_rasters(read_pnm(image_path), read_pnm(labelmap_path), palette);
}

TexturePair generate_texture_pair(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> noise(-24, 24);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // A random straight boundary splits the scene; one side gets horizontal
    // stripes, the other a checkerboard, each with pixel noise.
    const double angle = unit(rng) * 3.141592653589793;
    const double nx = std::cos(angle), ny = std::sin(angle);
    const double offset = (unit(rng) - 0.5) * 0.5;
    TexturePair out{{rows, cols, 3, std::vector<std::uint8_t>(rows * cols * 3)},
                    {rows, cols, 3, std::vector<std::uint8_t>(rows * cols * 3)},
                    {{0, {255, 0, 0}}, {1, {0, 0, 255}}}};
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double u = (r + 0.5) / rows - 0.5, v = (c + 0.5) / cols - 0.5;
            const int cls = (u * nx + v * ny > offset) ? 1 : 0;
            const int base = cls == 0 ? ((r / 2) % 2 ? 200 : 60) : (((r / 2) + (c / 2)) % 2 ? 180 : 80);
            const std::size_t p = (r * cols + c) * 3;
            for (std::size_t ch = 0; ch < 3; ++ch)
                out.image.pixels[p + ch] = static_cast<std::uint8_t>(std::clamp(base + noise(rng), 0, 255));
            std::copy(out.palette[cls].rgb.begin(), out.palette[cls].rgb.end(), out.labelmap.pixels.begin() + p);
        }
    }
    return out;
}

Dataset load_labelmap_dataset(const std::string& list_path, const Palette& palette) {
    std::ifstream in(list_path);
    if (!in) throw DataError("cannot open list " + list_path);
    const auto base = std::filesystem::path(list_path).parent_path();
    Dataset out;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string image, labelmap;
        if (!(fields >> image)) continue;
        if (!(fields >> labelmap)) throw DataError(list_path + ": line needs `image_path labelmap_path`");
        auto resolve = [&](const std::string& p) {
            const std::filesystem::path path(p);
            return (path.is_absolute() ? path : base / path).string();
        };
        auto [input, labels] = load_labelmap_pair(resolve(image), resolve(labelmap), palette);
        out.push_back({image, std::move(input), std::move(labels), -1});
    }
    if (out.empty()) throw DataError(list_path + " lists no image pairs");
    return out;
}

}  // namespace mdrnn
