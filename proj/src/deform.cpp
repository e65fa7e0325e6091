#include "mdrnn/deform.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mdrnn/errors.hpp"

namespace mdrnn {

void DeformParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("deformation sigma must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("deformation alpha must be non-negative");
}

double DisplacementField::max_magnitude() const {
    double best = 0.0;
    for (std::size_t p = 0; p < dx.size(); ++p) best = std::max(best, std::hypot(dx[p], dy[p]));
    return best;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) sum += (k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma)));
    for (double& v : k) v /= sum;
    return k;
}

// Separable convolution, zero outside the grid.
std::vector<double> smooth(const std::vector<double>& field, std::size_t rows, std::size_t cols,
                           const std::vector<double>& kernel) {
    const long radius = static_cast<long>(kernel.size() / 2);
    std::vector<double> tmp(field.size(), 0.0), out(field.size(), 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            double sum = 0.0;
            for (long k = -radius; k <= radius; ++k) {
                const long cc = static_cast<long>(c) + k;
                if (cc >= 0 && cc < static_cast<long>(cols)) sum += kernel[k + radius] * field[r * cols + cc];
            }
            tmp[r * cols + c] = sum;
        }
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            double sum = 0.0;
            for (long k = -radius; k <= radius; ++k) {
                const long rr = static_cast<long>(r) + k;
                if (rr >= 0 && rr < static_cast<long>(rows)) sum += kernel[k + radius] * tmp[rr * cols + c];
            }
            out[r * cols + c] = sum;
        }
    return out;
}

double sample_bilinear(const SequenceND& image, std::size_t rows, std::size_t cols, double y, double x) {
    const double fy = std::floor(y), fx = std::floor(x);
    const double wy = y - fy, wx = x - fx;
    const long r0 = static_cast<long>(fy), c0 = static_cast<long>(fx);
    auto pixel = [&](long r, long c) -> double {
        if (r < 0 || c < 0 || r >= static_cast<long>(rows) || c >= static_cast<long>(cols)) return 0.0;
        return image.at(static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c))[0];
    };
    double value = 0.0;
    if ((1 - wy) * (1 - wx) != 0.0) value += (1 - wy) * (1 - wx) * pixel(r0, c0);
    if ((1 - wy) * wx != 0.0) value += (1 - wy) * wx * pixel(r0, c0 + 1);
    if (wy * (1 - wx) != 0.0) value += wy * (1 - wx) * pixel(r0 + 1, c0);
    if (wy * wx != 0.0) value += wy * wx * pixel(r0 + 1, c0 + 1);
    return value;
}

}  // namespace

DisplacementField displacement_field(std::size_t rows, std::size_t cols, const DeformParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::vector<double> fx(rows * cols), fy(rows * cols);
    for (double& v : fx) v = uniform(rng);
    for (double& v : fy) v = uniform(rng);
    const auto kernel = gaussian_kernel(params.sigma);
    DisplacementField field{rows, cols, smooth(fx, rows, cols, kernel), smooth(fy, rows, cols, kernel)};
    for (double& v : field.dx) v *= params.alpha;
    for (double& v : field.dy) v *= params.alpha;
    return field;
}

SequenceND elastic_deform(const SequenceND& image, const DeformParams& params) {
    params.validate();
    if (image.shape().rank() != 2 || image.width() != 1)
        throw ConfigError("elastic deformation needs a two-dimensional single-channel image");
    const std::size_t rows = image.shape()[0], cols = image.shape()[1];
    const DisplacementField field = displacement_field(rows, cols, params);
    SequenceND out(image.shape(), 1);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t p = r * cols + c;
            const double v = sample_bilinear(image, rows, cols, r + field.dy[p], c + field.dx[p]);
            out.at(p)[0] = std::clamp(v, 0.0, 1.0);
        }
    return out;
}

std::uint64_t per_image_seed(std::uint64_t seed, std::size_t index) {
    // splitmix64 finaliser over (seed, index)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

IdxFile deform_idx(const IdxFile& images, double sigma, double alpha, std::uint64_t seed) {
    DeformParams params{sigma, alpha, seed};
    params.validate();
    const auto decoded = idx_to_images(images);
    std::vector<SequenceND> deformed;
    deformed.reserve(decoded.size());
    for (std::size_t i = 0; i < decoded.size(); ++i) {
        params.seed = per_image_seed(seed, i);
        deformed.push_back(elastic_deform(decoded[i], params));
    }
    if (deformed.empty()) return images;
    return images_to_idx(deformed);
}

}  // namespace mdrnn
