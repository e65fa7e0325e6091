#pragma once

// Introspection: input sensitivity (Jacobian) maps and hidden-unit activation images.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mdrnn/grid.hpp"
#include "mdrnn/network.hpp"
#include "mdrnn/raster.hpp"

namespace mdrnn {

struct JacobianMap {
    Shape shape;
    std::vector<double> values;  ///< per input point, sum over channels of |d o_k / d in|
    Coord focus_point;
    std::size_t focus_class = 0;
};

/// Derivatives of the pre-softmax output o_k at `point` with respect to every
/// input value. Throws PreconditionError for a point or class out of range.
JacobianMap jacobian(const Network& net, const SequenceND& input, const Coord& point, std::size_t focus_class);

/// Signed d o_k(point) / d input, one value per input channel.
SequenceND input_gradient(const Network& net, const SequenceND& input, const Coord& point, std::size_t focus_class);

/// One hidden unit: direction index and the unit's position in that
/// direction's output vector.
struct UnitSelection {
    std::uint32_t direction = 0;
    std::size_t unit = 0;
};

/// Parses "d:u"; throws ConfigError on malformed text.
UnitSelection parse_unit_selection(const std::string& text);

struct UnitImage {
    UnitSelection unit;
    std::vector<double> values;  ///< in storage order
    double min = 0.0;
    double max = 0.0;
    Raster raster;
};

struct ActivationDump {
    Shape shape;
    std::vector<UnitImage> units;
    Raster argmax;  ///< predicted class per point, as its 8-bit index
};

/// Activations of the selected units, min-max normalized to 0..255 per image
/// (a constant image becomes all zeros). Only two-dimensional inputs can be
/// rasterized. Throws PreconditionError for an invalid selection.
ActivationDump dump_activations(const Network& net, const SequenceND& input, const std::vector<UnitSelection>& units);

/// Min-max normalization to 8-bit grayscale; returns the bounds used.
Raster to_grayscale(const Shape& shape, const std::vector<double>& values, double* min_out = nullptr,
                    double* max_out = nullptr);

/// Writes `<stem>.pgm` and `<stem>.txt` holding the focus point, class and
/// normalization constants.
void write_jacobian(const std::string& stem, const JacobianMap& map);
void write_activation_dump(const std::string& directory, const ActivationDump& dump);

}  // namespace mdrnn
