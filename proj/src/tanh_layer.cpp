#include "mdrnn/tanh_layer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdrnn/errors.hpp"
#include "scan_detail.hpp"

namespace mdrnn {

void TanhLayerConfig::validate() const {
    if (num_dims == 0 || input_width == 0 || hidden_width == 0)
        throw ConfigError("tanh layer needs positive dimensions, input width and hidden width");
}

std::vector<ParamGroup> TanhLayerConfig::groups() const {
    std::vector<ParamGroup> out;
    out.push_back({"input", input_weights_offset(), hidden_width * input_width});
    for (std::size_t i = 0; i < num_dims; ++i)
        out.push_back({"recurrent_d" + std::to_string(i), recurrent_offset(i), hidden_width * hidden_width});
    out.push_back({"bias", bias_offset(), hidden_width});
    return out;
}

TanhWeights::TanhWeights(const TanhLayerConfig& config) : config_(config), values_(config.parameter_count(), 0.0) {
    config_.validate();
}

TanhWeights::TanhWeights(const TanhLayerConfig& config, std::vector<double> values)
    : config_(config), values_(std::move(values)) {
    config_.validate();
    if (values_.size() != config_.parameter_count()) throw ConfigError("tanh weight vector has the wrong length");
}

std::span<double> TanhWeights::input_weights() {
    return std::span<double>(values_).subspan(config_.input_weights_offset(),
                                              config_.hidden_width * config_.input_width);
}

std::span<double> TanhWeights::recurrent(std::size_t axis) {
    if (axis >= config_.num_dims) throw PreconditionError("recurrent block index out of range");
    return std::span<double>(values_).subspan(config_.recurrent_offset(axis),
                                              config_.hidden_width * config_.hidden_width);
}

std::span<double> TanhWeights::bias() {
    return std::span<double>(values_).subspan(config_.bias_offset(), config_.hidden_width);
}

namespace {

void check_shapes(const TanhLayerConfig& config, std::span<const double> weights, const SequenceND& input) {
    config.validate();
    if (weights.size() != config.parameter_count())
        throw ConfigError("tanh layer expects " + std::to_string(config.parameter_count()) + " parameters, got " +
                          std::to_string(weights.size()));
    if (input.width() != config.input_width)
        throw ConfigError("input width " + std::to_string(input.width()) + " does not match layer input width " +
                          std::to_string(config.input_width));
    if (input.shape().rank() != config.num_dims)
        throw ConfigError("input has " + std::to_string(input.shape().rank()) + " dimensions, layer expects " +
                          std::to_string(config.num_dims));
}

}  // namespace

TanhTape tanh_forward(const TanhLayerConfig& config, std::span<const double> weights, const SequenceND& input) {
    check_shapes(config, weights, input);
    const std::size_t H = config.hidden_width;
    const std::size_t I = config.input_width;
    const Shape& shape = input.shape();

    TanhTape tape{shape, H, std::vector<double>(shape.point_count() * H), std::vector<double>(shape.point_count() * H)};
    const auto w_in = weights.subspan(config.input_weights_offset(), H * I);
    const auto bias = weights.subspan(config.bias_offset(), H);

    detail::Odometer pos(shape, false);
    for (std::size_t n = 0; n < shape.point_count(); ++n, pos.advance()) {
        const std::size_t p = pos.flat();
        double* a = tape.pre_activations.data() + p * H;
        std::copy(bias.begin(), bias.end(), a);
        gemv_acc(w_in, H, I, input.at(p).data(), a);
        for (std::size_t i = 0; i < config.num_dims; ++i) {
            if (!pos.has_predecessor(i)) continue;
            const double* h_prev = tape.activations.data() + (p - shape.stride(i)) * H;
            gemv_acc(weights.subspan(config.recurrent_offset(i), H * H), H, H, h_prev, a);
        }
        double* h = tape.activations.data() + p * H;
        for (std::size_t k = 0; k < H; ++k) h[k] = std::tanh(a[k]);
    }
    return tape;
}

DeltaTape tanh_backward(const TanhLayerConfig& config, std::span<const double> weights, const SequenceND& input,
                        const TanhTape& tape, const DeltaTape& output_deltas, std::span<double> gradient_accumulator,
                        SequenceND* input_gradients) {
    check_shapes(config, weights, input);
    const std::size_t H = config.hidden_width;
    const std::size_t I = config.input_width;
    const Shape& shape = input.shape();
    if (!(tape.shape == shape) || tape.hidden_width != H || tape.activations.size() != shape.point_count() * H)
        throw PreconditionError("tape does not belong to this input and layer");
    if (!(output_deltas.shape() == shape) || output_deltas.width() != H)
        throw PreconditionError("output deltas do not match the tape");
    if (gradient_accumulator.size() != config.parameter_count())
        throw PreconditionError("gradient accumulator has the wrong length");
    if (input_gradients && (!(input_gradients->shape() == shape) || input_gradients->width() != I))
        throw PreconditionError("input gradient buffer does not match the input");

    const auto w_in = weights.subspan(config.input_weights_offset(), H * I);
    auto g_in = gradient_accumulator.subspan(config.input_weights_offset(), H * I);
    auto g_bias = gradient_accumulator.subspan(config.bias_offset(), H);

    // Starts as the injected error; successors add their recurrent error as
    // they are processed, so each point is complete by the time it is reached.
    DeltaTape errors = output_deltas;
    DeltaTape deltas(shape, H);

    detail::Odometer pos(shape, true);
    for (std::size_t n = 0; n < shape.point_count(); ++n, pos.advance()) {
        const std::size_t p = pos.flat();
        const double* e = errors.at(p).data();
        const double* h = tape.activations.data() + p * H;
        double* d = deltas.at(p).data();
        for (std::size_t k = 0; k < H; ++k) d[k] = (1.0 - h[k] * h[k]) * e[k];

        outer_acc(g_in, H, I, d, input.at(p).data());
        for (std::size_t k = 0; k < H; ++k) g_bias[k] += d[k];
        if (input_gradients) gemv_t_acc(w_in, H, I, d, input_gradients->at(p).data());

        for (std::size_t i = 0; i < config.num_dims; ++i) {
            if (!pos.has_predecessor(i)) continue;
            const std::size_t q = p - shape.stride(i);
            outer_acc(gradient_accumulator.subspan(config.recurrent_offset(i), H * H), H, H, d,
                      tape.activations.data() + q * H);
            gemv_t_acc(weights.subspan(config.recurrent_offset(i), H * H), H, H, d, errors.at(q).data());
        }
    }
    return deltas;
}

TanhBackwardResult tanh_backward(const TanhLayerConfig& config, std::span<const double> weights,
                                 const SequenceND& input, const TanhTape& tape, const DeltaTape& output_deltas) {
    TanhBackwardResult out{DeltaTape{}, TanhGradients(config), SequenceND(input.shape(), input.width())};
    out.hidden_deltas = tanh_backward(config, weights, input, tape, output_deltas, out.gradients.values(),
                                      &out.input_gradients);
    return out;
}

}  // namespace mdrnn
