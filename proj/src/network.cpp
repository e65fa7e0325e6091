#include "mdrnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mdrnn/errors.hpp"

namespace mdrnn {

std::string to_string(LayerKind kind) { return kind == LayerKind::tanh ? "tanh" : "lstm"; }

LayerKind parse_layer_kind(const std::string& text) {
    if (text == "tanh") return LayerKind::tanh;
    if (text == "lstm") return LayerKind::lstm;
    throw ConfigError("unknown layer kind '" + text + "' (expected tanh or lstm)");
}

void NetworkConfig::validate() const {
    if (num_dims == 0) throw ConfigError("network needs at least one dimension");
    if (input_width == 0) throw ConfigError("network input width must be positive");
    if (hidden_size == 0) throw ConfigError("network hidden size must be positive");
    if (cells_per_block == 0) throw ConfigError("cells per block must be positive");
    if (num_classes == 0) throw ConfigError("network needs at least one output class");
    if (layer_kind != LayerKind::tanh && layer_kind != LayerKind::lstm) throw ConfigError("unknown layer kind");
    if (multidirectional && num_dims > 16) throw ConfigError("too many dimensions for a multi-directional network");
}

std::uint32_t NetworkConfig::direction_count() const {
    return multidirectional ? mdrnn::direction_count(num_dims) : 1u;
}

std::size_t NetworkConfig::layer_output_width() const {
    return layer_kind == LayerKind::tanh ? hidden_size : hidden_size * cells_per_block;
}

std::size_t NetworkConfig::layer_parameter_count() const {
    return layer_kind == LayerKind::tanh ? tanh_config().parameter_count() : lstm_config().parameter_count();
}

TanhLayerConfig NetworkConfig::tanh_config() const { return {num_dims, input_width, hidden_size}; }

LstmLayerConfig NetworkConfig::lstm_config() const { return {num_dims, input_width, hidden_size, cells_per_block}; }

std::vector<ParamGroup> NetworkConfig::layer_groups() const {
    return layer_kind == LayerKind::tanh ? tanh_config().groups() : lstm_config().groups();
}

namespace {

std::size_t total_parameters(const NetworkConfig& c) {
    c.validate();
    return c.direction_count() * c.layer_parameter_count() +
           c.num_classes * (c.direction_count() * c.layer_output_width() + 1);
}

}  // namespace

Network::Network(const NetworkConfig& config) : config_(config), params_(total_parameters(config), 0.0) {}

Network::Network(const NetworkConfig& config, std::vector<double> params)
    : config_(config), params_(std::move(params)) {
    if (params_.size() != total_parameters(config_))
        throw ConfigError("network expects " + std::to_string(total_parameters(config_)) + " parameters, got " +
                          std::to_string(params_.size()));
}

std::size_t Network::layer_offset(std::uint32_t direction) const {
    if (direction >= config_.direction_count()) throw PreconditionError("direction out of range");
    return direction * config_.layer_parameter_count();
}

std::span<const double> Network::layer_params(std::uint32_t direction) const {
    return params().subspan(layer_offset(direction), config_.layer_parameter_count());
}

std::span<double> Network::layer_params(std::uint32_t direction) {
    return params().subspan(layer_offset(direction), config_.layer_parameter_count());
}

std::size_t Network::output_weights_offset() const {
    return config_.direction_count() * config_.layer_parameter_count();
}

std::size_t Network::output_bias_offset() const {
    return output_weights_offset() + config_.num_classes * config_.direction_count() * config_.layer_output_width();
}

std::span<const double> Network::output_weights() const {
    return params().subspan(output_weights_offset(), output_bias_offset() - output_weights_offset());
}

std::span<double> Network::output_weights() {
    return params().subspan(output_weights_offset(), output_bias_offset() - output_weights_offset());
}

std::span<const double> Network::output_bias() const {
    return params().subspan(output_bias_offset(), config_.num_classes);
}

std::span<double> Network::output_bias() { return params().subspan(output_bias_offset(), config_.num_classes); }

std::vector<ParamGroup> Network::groups() const {
    std::vector<ParamGroup> out;
    for (std::uint32_t d = 0; d < config_.direction_count(); ++d) {
        auto layer = rebase(config_.layer_groups(), "dir" + std::to_string(d) + "/", layer_offset(d));
        out.insert(out.end(), layer.begin(), layer.end());
    }
    out.push_back({"output/weights", output_weights_offset(), output_bias_offset() - output_weights_offset()});
    out.push_back({"output/bias", output_bias_offset(), config_.num_classes});
    return out;
}

void initialize_uniform(Network& net, std::uint64_t seed, double range) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-range, range);
    for (double& w : net.params()) w = dist(rng);
}

std::span<const double> layer_output(const LayerTape& tape, std::size_t local_flat) {
    return std::visit([local_flat](const auto& t) { return t.h(local_flat); }, tape);
}

namespace {

void check_input(const NetworkConfig& config, const SequenceND& input) {
    if (input.width() != config.input_width)
        throw ConfigError("input width " + std::to_string(input.width()) + " does not match network input width " +
                          std::to_string(config.input_width));
    if (input.shape().rank() != config.num_dims)
        throw ConfigError("input has " + std::to_string(input.shape().rank()) + " dimensions, network expects " +
                          std::to_string(config.num_dims));
}

void softmax(const double* o, double* p, std::size_t k) {
    const double top = *std::max_element(o, o + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += (p[c] = std::exp(o[c] - top));
    for (std::size_t c = 0; c < k; ++c) p[c] /= sum;
}

}  // namespace

ForwardPass network_forward(const Network& net, const SequenceND& input) {
    const NetworkConfig& config = net.config();
    check_input(config, input);
    const Shape& shape = input.shape();
    const std::size_t K = config.num_classes;
    const std::size_t hidden = config.layer_output_width();
    const std::size_t span_width = config.direction_count() * hidden;
    const std::uint32_t directions = config.direction_count();

    ForwardPass out{SequenceND(shape, K), SequenceND(shape, K), {}, {}};
    out.tapes.reserve(directions);
    out.maps.reserve(directions);
    for (std::uint32_t d = 0; d < directions; ++d) {
        out.maps.push_back(reflection_map(shape, d));
        const SequenceND local = input.permuted(out.maps.back());
        if (config.layer_kind == LayerKind::tanh)
            out.tapes.emplace_back(tanh_forward(config.tanh_config(), net.layer_params(d), local));
        else
            out.tapes.emplace_back(lstm_forward(config.lstm_config(), net.layer_params(d), local));
    }

    const auto w = net.output_weights();
    const auto bias = net.output_bias();
    for (std::size_t p = 0; p < shape.point_count(); ++p) std::copy(bias.begin(), bias.end(), out.logits.at(p).begin());
    for (std::uint32_t d = 0; d < directions; ++d) {
        const auto& map = out.maps[d];
        for (std::size_t local = 0; local < shape.point_count(); ++local) {
            const auto h = layer_output(out.tapes[d], local);
            double* o = out.logits.at(map[local]).data();
            for (std::size_t k = 0; k < K; ++k) {
                const double* row = w.data() + k * span_width + d * hidden;
                double sum = 0.0;
                for (std::size_t j = 0; j < hidden; ++j) sum += row[j] * h[j];
                o[k] += sum;
            }
        }
    }
    for (std::size_t p = 0; p < shape.point_count(); ++p)
        softmax(out.logits.at(p).data(), out.probabilities.at(p).data(), K);
    return out;
}

SequenceND backward_from_logits(const Network& net, const SequenceND& input, const ForwardPass& forward,
                                const SequenceND& logit_deltas, std::span<double> gradients) {
    const NetworkConfig& config = net.config();
    check_input(config, input);
    const Shape& shape = input.shape();
    const std::size_t K = config.num_classes;
    const std::size_t hidden = config.layer_output_width();
    const std::size_t span_width = config.direction_count() * hidden;
    const std::uint32_t directions = config.direction_count();
    if (forward.tapes.size() != directions || forward.maps.size() != directions || !(forward.logits.shape() == shape))
        throw PreconditionError("forward pass does not belong to this network and input");
    if (!(logit_deltas.shape() == shape) || logit_deltas.width() != K)
        throw PreconditionError("logit deltas do not match the output layer");
    const bool want_params = !gradients.empty();
    if (want_params && gradients.size() != net.parameter_count())
        throw PreconditionError("gradient buffer has the wrong length");

    const auto w = net.output_weights();
    SequenceND input_gradients(shape, input.width());

    if (want_params) {
        double* g_w = gradients.data() + net.output_weights_offset();
        double* g_b = gradients.data() + net.output_bias_offset();
        for (std::uint32_t d = 0; d < directions; ++d) {
            const auto& map = forward.maps[d];
            for (std::size_t local = 0; local < shape.point_count(); ++local) {
                const auto h = layer_output(forward.tapes[d], local);
                const double* delta = logit_deltas.at(map[local]).data();
                for (std::size_t k = 0; k < K; ++k) {
                    if (delta[k] == 0.0) continue;
                    double* row = g_w + k * span_width + d * hidden;
                    for (std::size_t j = 0; j < hidden; ++j) row[j] += delta[k] * h[j];
                }
            }
        }
        for (std::size_t p = 0; p < shape.point_count(); ++p) {
            const auto delta = logit_deltas.at(p);
            for (std::size_t k = 0; k < K; ++k) g_b[k] += delta[k];
        }
    }

    std::vector<double> scratch;
    for (std::uint32_t d = 0; d < directions; ++d) {
        const auto& map = forward.maps[d];
        DeltaTape injected(shape, hidden);
        for (std::size_t local = 0; local < shape.point_count(); ++local) {
            const double* delta = logit_deltas.at(map[local]).data();
            double* dh = injected.at(local).data();
            for (std::size_t k = 0; k < K; ++k) {
                if (delta[k] == 0.0) continue;
                const double* row = w.data() + k * span_width + d * hidden;
                for (std::size_t j = 0; j < hidden; ++j) dh[j] += delta[k] * row[j];
            }
        }

        const SequenceND local_input = input.permuted(map);
        SequenceND local_grad(shape, input.width());
        scratch.assign(config.layer_parameter_count(), 0.0);
        std::span<double> layer_grad = want_params ? gradients.subspan(net.layer_offset(d), scratch.size())
                                                   : std::span<double>(scratch);
        if (config.layer_kind == LayerKind::tanh)
            tanh_backward(config.tanh_config(), net.layer_params(d), local_input, std::get<TanhTape>(forward.tapes[d]),
                          injected, layer_grad, &local_grad);
        else
            lstm_backward(config.lstm_config(), net.layer_params(d), local_input, std::get<LstmTape>(forward.tapes[d]),
                          injected, layer_grad, &local_grad);

        for (std::size_t local = 0; local < shape.point_count(); ++local) {
            const auto src = local_grad.at(local);
            auto dst = input_gradients.at(map[local]);
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
        }
    }
    return input_gradients;
}

namespace {

void check_targets(const NetworkConfig& config, const ForwardPass& forward, const LabelGrid& targets) {
    if (!(targets.shape() == forward.logits.shape()))
        throw DataError("target labels do not match the input shape");
    if (targets.num_classes() != config.num_classes)
        throw DataError("targets have " + std::to_string(targets.num_classes()) + " classes, network has " +
                        std::to_string(config.num_classes));
}

double point_loss(const double* o, std::size_t k, std::uint32_t target) {
    const double top = *std::max_element(o, o + k);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(o[c] - top);
    return top + std::log(sum) - o[target];
}

}  // namespace

double cross_entropy(const ForwardPass& forward, const LabelGrid& targets) {
    if (!(targets.shape() == forward.logits.shape())) throw DataError("target labels do not match the input shape");
    const std::size_t K = forward.logits.width();
    if (targets.num_classes() != K) throw DataError("target class count does not match the output layer");
    double loss = 0.0;
    for (std::size_t p = 0; p < targets.shape().point_count(); ++p)
        loss += point_loss(forward.logits.at(p).data(), K, targets[p]);
    return loss;
}

BackwardPass network_backward(const Network& net, const SequenceND& input, const ForwardPass& forward,
                              const LabelGrid& targets) {
    check_targets(net.config(), forward, targets);

    BackwardPass out{std::vector<double>(net.parameter_count(), 0.0), cross_entropy(forward, targets)};
    SequenceND deltas = forward.probabilities;
    for (std::size_t p = 0; p < targets.shape().point_count(); ++p) deltas.at(p)[targets[p]] -= 1.0;
    backward_from_logits(net, input, forward, deltas, out.gradients);
    return out;
}

ParameterCount count_parameters(const NetworkConfig& config) {
    config.validate();
    const std::size_t D = config.direction_count();
    ParameterCount out;
    std::size_t peepholes = 0;
    for (const auto& g : config.layer_groups()) {
        if (g.name.starts_with("peephole")) {
            peepholes += g.size * D;
            continue;
        }
        out.breakdown.emplace_back(g.name, g.size * D);
    }
    if (config.layer_kind == LayerKind::lstm) {
        // Keep the layer order: input, recurrent..., peepholes, bias.
        out.breakdown.insert(out.breakdown.end() - 1, {"peepholes", peepholes});
    }
    out.breakdown.emplace_back("output_weights", config.num_classes * D * config.layer_output_width());
    out.breakdown.emplace_back("output_bias", config.num_classes);
    for (const auto& [name, size] : out.breakdown) out.total += size;
    return out;
}

ParameterCount count_parameters(const Network& net) { return count_parameters(net.config()); }

}  // namespace mdrnn
