#pragma once

// Multi-directional network: 2^n independent hidden layers, each scanning the
// grid from a different vertex, feeding one shared softmax output layer.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mdrnn/grid.hpp"
#include "mdrnn/lstm_layer.hpp"
#include "mdrnn/params.hpp"
#include "mdrnn/tanh_layer.hpp"

namespace mdrnn {

enum class LayerKind : std::uint32_t { tanh = 0, lstm = 1 };

std::string to_string(LayerKind kind);
/// Accepts "tanh" or "lstm"; throws ConfigError otherwise.
LayerKind parse_layer_kind(const std::string& text);

struct NetworkConfig {
    std::size_t num_dims = 2;
    LayerKind layer_kind = LayerKind::lstm;
    std::size_t input_width = 1;
    /// Hidden units (tanh) or memory blocks (lstm) per direction.
    std::size_t hidden_size = 25;
    std::size_t cells_per_block = 1;
    std::size_t num_classes = 11;
    bool multidirectional = true;

    void validate() const;
    std::uint32_t direction_count() const;
    /// Width of one direction's hidden output.
    std::size_t layer_output_width() const;
    std::size_t layer_parameter_count() const;
    TanhLayerConfig tanh_config() const;
    LstmLayerConfig lstm_config() const;
    std::vector<ParamGroup> layer_groups() const;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// All trainable parameters in one flat vector: each direction's layer in
/// ascending order, then the K x (D * hidden) output weights, then K output biases.
class Network {
public:
    explicit Network(const NetworkConfig& config);
    Network(const NetworkConfig& config, std::vector<double> params);

    const NetworkConfig& config() const noexcept { return config_; }
    std::span<const double> params() const noexcept { return params_; }
    std::span<double> params() noexcept { return params_; }
    std::size_t parameter_count() const noexcept { return params_.size(); }

    std::size_t layer_offset(std::uint32_t direction) const;
    std::span<const double> layer_params(std::uint32_t direction) const;
    std::span<double> layer_params(std::uint32_t direction);
    std::size_t output_weights_offset() const;
    std::size_t output_bias_offset() const;
    std::span<const double> output_weights() const;
    std::span<double> output_weights();
    std::span<const double> output_bias() const;
    std::span<double> output_bias();

    /// Every parameter group with its position in params(), e.g. "dir1/recurrent_d0".
    std::vector<ParamGroup> groups() const;

private:
    NetworkConfig config_;
    std::vector<double> params_;
};

/// Uniform in [-range, range], drawn in flat parameter order.
void initialize_uniform(Network& net, std::uint64_t seed, double range = 0.1);

using LayerTape = std::variant<TanhTape, LstmTape>;

/// Hidden output of one direction's layer at a layer-local flat index.
std::span<const double> layer_output(const LayerTape& tape, std::size_t local_flat);

struct ForwardPass {
    SequenceND logits;         ///< output pre-activations o, width K
    SequenceND probabilities;  ///< softmax(o), width K
    std::vector<LayerTape> tapes;                 ///< per direction, layer-local coordinates
    std::vector<std::vector<std::size_t>> maps;   ///< per direction, local flat -> storage flat
};

ForwardPass network_forward(const Network& net, const SequenceND& input);

struct BackwardPass {
    std::vector<double> gradients;  ///< congruent with Network::params()
    double loss = 0.0;              ///< summed cross-entropy over all points
};

/// Cross-entropy gradients for per-point class targets. Throws DataError when
/// the targets do not match the input shape or class count.
BackwardPass network_backward(const Network& net, const SequenceND& input, const ForwardPass& forward,
                              const LabelGrid& targets);

/// Backpropagates arbitrary output pre-activation deltas (width K). Adds the
/// parameter gradients into `gradients` when it is non-empty and returns
/// d objective / d input.
SequenceND backward_from_logits(const Network& net, const SequenceND& input, const ForwardPass& forward,
                                const SequenceND& logit_deltas, std::span<double> gradients);

/// Summed cross-entropy of a forward pass against targets.
double cross_entropy(const ForwardPass& forward, const LabelGrid& targets);

struct ParameterCount {
    std::size_t total = 0;
    /// Aggregated over directions: input, recurrent_d<i>, peepholes, bias,
    /// output_weights, output_bias. Peepholes appear only for LSTM layers.
    std::vector<std::pair<std::string, std::size_t>> breakdown;
};

ParameterCount count_parameters(const NetworkConfig& config);
ParameterCount count_parameters(const Network& net);

}  // namespace mdrnn
