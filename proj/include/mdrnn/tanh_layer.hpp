#pragma once

// Summation-unit MDRNN hidden layer with tanh activation.
//
// At each point x, visited in scan order,
//   a_k = b_k + sum_j W_kj in_j + sum_{i : x_i > 0} sum_j U^(i)_kj h_j(x - e_i)
//   h_k = tanh(a_k)
// with one recurrent matrix U^(i) per dimension. The backward pass visits the
// points in reverse scan order and returns exact gradients.

#include <cstddef>
#include <span>
#include <vector>

#include "mdrnn/grid.hpp"
#include "mdrnn/params.hpp"

namespace mdrnn {

struct TanhLayerConfig {
    std::size_t num_dims = 2;
    std::size_t input_width = 1;
    std::size_t hidden_width = 1;

    /// Throws ConfigError unless every field is positive.
    void validate() const;

    // Flat parameter layout: input weights (H x I), then one H x H recurrent
    // block per dimension in ascending order, then H biases.
    std::size_t input_weights_offset() const { return 0; }
    std::size_t recurrent_offset(std::size_t axis) const {
        return hidden_width * input_width + axis * hidden_width * hidden_width;
    }
    std::size_t bias_offset() const { return recurrent_offset(num_dims); }
    std::size_t parameter_count() const { return bias_offset() + hidden_width; }
    std::vector<ParamGroup> groups() const;
};

/// Owning parameter vector for one tanh layer. Gradients use the same type,
/// so a gradient store is congruent with the weights it belongs to.
class TanhWeights {
public:
    /// All zero.
    explicit TanhWeights(const TanhLayerConfig& config);
    TanhWeights(const TanhLayerConfig& config, std::vector<double> values);

    const TanhLayerConfig& config() const noexcept { return config_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    std::span<double> input_weights();
    std::span<double> recurrent(std::size_t axis);
    std::span<double> bias();

private:
    TanhLayerConfig config_;
    std::vector<double> values_;
};

using TanhGradients = TanhWeights;

/// Per-point error signals, H values per point.
using DeltaTape = SequenceND;

/// Stored forward state: pre-activations a and activations h at every point.
struct TanhTape {
    Shape shape;
    std::size_t hidden_width = 0;
    std::vector<double> pre_activations;
    std::vector<double> activations;

    std::span<const double> h(std::size_t flat) const {
        return {activations.data() + flat * hidden_width, hidden_width};
    }
    std::span<const double> a(std::size_t flat) const {
        return {pre_activations.data() + flat * hidden_width, hidden_width};
    }
};

struct TanhBackwardResult {
    DeltaTape hidden_deltas;     ///< tanh'(a) * e at every point
    TanhGradients gradients;
    SequenceND input_gradients;  ///< d objective / d input
};

/// Throws ConfigError when the input width or parameter count does not match.
TanhTape tanh_forward(const TanhLayerConfig& config, std::span<const double> weights, const SequenceND& input);

/// `output_deltas` holds d objective / d h injected from above (width H).
/// Gradients are added into `gradient_accumulator` (same layout as weights).
/// Returns hidden deltas and, if `input_gradients` is non-null, writes them there.
DeltaTape tanh_backward(const TanhLayerConfig& config, std::span<const double> weights, const SequenceND& input,
                        const TanhTape& tape, const DeltaTape& output_deltas, std::span<double> gradient_accumulator,
                        SequenceND* input_gradients);

TanhBackwardResult tanh_backward(const TanhLayerConfig& config, std::span<const double> weights,
                                 const SequenceND& input, const TanhTape& tape, const DeltaTape& output_deltas);

}  // namespace mdrnn
