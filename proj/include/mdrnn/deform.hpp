#pragma once

// Elastic deformation: two uniform [-1,1] random fields, smoothed by a
// normalised Gaussian truncated at 3 sigma (zero padding), scaled by alpha,
// give per-pixel displacements dx (field 1, along columns) and dy (field 2,
// along rows). Output pixel (i, j) is the bilinear sample of the input at
// (i + dy, j + dx); samples outside the image read as 0.

#include <cstdint>
#include <vector>

#include "mdrnn/grid.hpp"
#include "mdrnn/idx.hpp"

namespace mdrnn {

struct DeformParams {
    double sigma = 4.0;
    double alpha = 34.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError unless sigma > 0 and alpha >= 0.
    void validate() const;
};

struct DisplacementField {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> dx;
    std::vector<double> dy;

    double max_magnitude() const;
};

DisplacementField displacement_field(std::size_t rows, std::size_t cols, const DeformParams& params);

/// Two-dimensional, single-channel images.
SequenceND elastic_deform(const SequenceND& image, const DeformParams& params);

/// Seed for the i-th image of a set deformed under `seed`.
std::uint64_t per_image_seed(std::uint64_t seed, std::size_t index);

/// Deforms every image of a rank-3 unsigned-byte IDX file with its own field.
IdxFile deform_idx(const IdxFile& images, double sigma, double alpha, std::uint64_t seed);

}  // namespace mdrnn
