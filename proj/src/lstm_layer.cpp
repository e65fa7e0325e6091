#include "mdrnn/lstm_layer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdrnn/errors.hpp"
#include "scan_detail.hpp"

namespace mdrnn {

void LstmLayerConfig::validate() const {
    if (num_dims == 0 || input_width == 0 || num_blocks == 0 || cells_per_block == 0)
        throw ConfigError("LSTM layer needs positive dimensions, input width, block count and cells per block");
}

std::vector<ParamGroup> LstmLayerConfig::groups() const {
    std::vector<ParamGroup> out;
    out.push_back({"input", input_weights_offset(), row_count() * input_width});
    for (std::size_t i = 0; i < num_dims; ++i)
        out.push_back({"recurrent_d" + std::to_string(i), recurrent_offset(i), row_count() * cell_count()});
    for (std::size_t i = 0; i < num_dims; ++i)
        out.push_back({"peephole_input_d" + std::to_string(i), peephole_input_offset(i), cell_count()});
    for (std::size_t i = 0; i < num_dims; ++i)
        out.push_back({"peephole_forget_d" + std::to_string(i), peephole_forget_offset(i), cell_count()});
    out.push_back({"peephole_output", peephole_output_offset(), cell_count()});
    out.push_back({"bias", bias_offset(), row_count()});
    return out;
}

LstmWeights::LstmWeights(const LstmLayerConfig& config) : config_(config), values_(config.parameter_count(), 0.0) {
    config_.validate();
}

LstmWeights::LstmWeights(const LstmLayerConfig& config, std::vector<double> values)
    : config_(config), values_(std::move(values)) {
    config_.validate();
    if (values_.size() != config_.parameter_count()) throw ConfigError("LSTM weight vector has the wrong length");
}

std::span<double> LstmWeights::input_weights() {
    return std::span<double>(values_).subspan(0, config_.row_count() * config_.input_width);
}

std::span<double> LstmWeights::recurrent(std::size_t axis) {
    if (axis >= config_.num_dims) throw PreconditionError("recurrent block index out of range");
    return std::span<double>(values_).subspan(config_.recurrent_offset(axis),
                                              config_.row_count() * config_.cell_count());
}

std::span<double> LstmWeights::peephole_input(std::size_t axis) {
    if (axis >= config_.num_dims) throw PreconditionError("peephole index out of range");
    return std::span<double>(values_).subspan(config_.peephole_input_offset(axis), config_.cell_count());
}

std::span<double> LstmWeights::peephole_forget(std::size_t axis) {
    if (axis >= config_.num_dims) throw PreconditionError("peephole index out of range");
    return std::span<double>(values_).subspan(config_.peephole_forget_offset(axis), config_.cell_count());
}

std::span<double> LstmWeights::peephole_output() {
    return std::span<double>(values_).subspan(config_.peephole_output_offset(), config_.cell_count());
}

std::span<double> LstmWeights::bias() {
    return std::span<double>(values_).subspan(config_.bias_offset(), config_.row_count());
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_shapes(const LstmLayerConfig& config, std::span<const double> weights, const SequenceND& input) {
    config.validate();
    if (weights.size() != config.parameter_count())
        throw ConfigError("LSTM layer expects " + std::to_string(config.parameter_count()) + " parameters, got " +
                          std::to_string(weights.size()));
    if (input.width() != config.input_width)
        throw ConfigError("input width " + std::to_string(input.width()) + " does not match layer input width " +
                          std::to_string(config.input_width));
    if (input.shape().rank() != config.num_dims)
        throw ConfigError("input has " + std::to_string(input.shape().rank()) + " dimensions, layer expects " +
                          std::to_string(config.num_dims));
}

}  // namespace

LstmTape lstm_forward(const LstmLayerConfig& config, std::span<const double> weights, const SequenceND& input) {
    check_shapes(config, weights, input);
    const std::size_t n = config.num_dims;
    const std::size_t I = config.input_width;
    const std::size_t B = config.num_blocks;
    const std::size_t C = config.cells_per_block;
    const std::size_t R = config.row_count();
    const std::size_t N = config.cell_count();
    const Shape& shape = input.shape();
    const std::size_t points = shape.point_count();

    LstmTape tape{shape,
                  R,
                  N,
                  std::vector<double>(points * R),
                  std::vector<double>(points * R),
                  std::vector<double>(points * N),
                  std::vector<double>(points * N),
                  std::vector<double>(points * N)};

    const auto w_in = weights.subspan(config.input_weights_offset(), R * I);
    const auto bias = weights.subspan(config.bias_offset(), R);
    const double* peep_out = weights.data() + config.peephole_output_offset();

    detail::Odometer pos(shape, false);
    for (std::size_t count = 0; count < points; ++count, pos.advance()) {
        const std::size_t p = pos.flat();
        double* z = tape.pre_activations.data() + p * R;
        double* y = tape.activations.data() + p * R;
        double* s = tape.states.data() + p * N;

        std::copy(bias.begin(), bias.end(), z);
        gemv_acc(w_in, R, I, input.at(p).data(), z);
        for (std::size_t i = 0; i < n; ++i) {
            if (!pos.has_predecessor(i)) continue;
            const std::size_t q = p - shape.stride(i);
            gemv_acc(weights.subspan(config.recurrent_offset(i), R * N), R, N, tape.outputs.data() + q * N, z);
            const double* s_prev = tape.states.data() + q * N;
            const double* peep_in = weights.data() + config.peephole_input_offset(i);
            const double* peep_f = weights.data() + config.peephole_forget_offset(i);
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t c = 0; c < C; ++c) {
                    const std::size_t cell = b * C + c;
                    z[config.input_gate_row(b)] += peep_in[cell] * s_prev[cell];
                    z[config.forget_gate_row(i, b)] += peep_f[cell] * s_prev[cell];
                }
            }
        }

        for (std::size_t b = 0; b < B; ++b) {
            y[config.input_gate_row(b)] = sigmoid(z[config.input_gate_row(b)]);
            for (std::size_t i = 0; i < n; ++i) y[config.forget_gate_row(i, b)] = sigmoid(z[config.forget_gate_row(i, b)]);
        }
        for (std::size_t cell = 0; cell < N; ++cell) y[config.cell_input_row(cell)] = std::tanh(z[config.cell_input_row(cell)]);

        for (std::size_t b = 0; b < B; ++b) {
            const double iota = y[config.input_gate_row(b)];
            for (std::size_t c = 0; c < C; ++c) {
                const std::size_t cell = b * C + c;
                s[cell] = iota * y[config.cell_input_row(cell)];
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (!pos.has_predecessor(i)) continue;
                const double phi = y[config.forget_gate_row(i, b)];
                const double* s_prev = tape.states.data() + (p - shape.stride(i)) * N;
                for (std::size_t c = 0; c < C; ++c) s[b * C + c] += phi * s_prev[b * C + c];
            }
        }

        double* ts = tape.squashed_states.data() + p * N;
        double* h = tape.outputs.data() + p * N;
        for (std::size_t b = 0; b < B; ++b) {
            const std::size_t row = config.output_gate_row(b);
            for (std::size_t c = 0; c < C; ++c) z[row] += peep_out[b * C + c] * s[b * C + c];
            const double omega = y[row] = sigmoid(z[row]);
            for (std::size_t c = 0; c < C; ++c) {
                const std::size_t cell = b * C + c;
                ts[cell] = std::tanh(s[cell]);
                h[cell] = omega * ts[cell];
            }
        }
    }
    return tape;
}

DeltaTape lstm_backward(const LstmLayerConfig& config, std::span<const double> weights, const SequenceND& input,
                        const LstmTape& tape, const DeltaTape& output_deltas, std::span<double> gradient_accumulator,
                        SequenceND* input_gradients) {
    check_shapes(config, weights, input);
    const std::size_t n = config.num_dims;
    const std::size_t I = config.input_width;
    const std::size_t B = config.num_blocks;
    const std::size_t C = config.cells_per_block;
    const std::size_t R = config.row_count();
    const std::size_t N = config.cell_count();
    const Shape& shape = input.shape();
    const std::size_t points = shape.point_count();

    if (!(tape.shape == shape) || tape.rows != R || tape.cells != N || tape.states.size() != points * N)
        throw PreconditionError("tape does not belong to this input and layer");
    if (!(output_deltas.shape() == shape) || output_deltas.width() != N)
        throw PreconditionError("output deltas do not match the tape");
    if (gradient_accumulator.size() != config.parameter_count())
        throw PreconditionError("gradient accumulator has the wrong length");
    if (input_gradients && (!(input_gradients->shape() == shape) || input_gradients->width() != I))
        throw PreconditionError("input gradient buffer does not match the input");

    const auto w_in = weights.subspan(config.input_weights_offset(), R * I);
    const double* peep_out = weights.data() + config.peephole_output_offset();
    auto g_in = gradient_accumulator.subspan(config.input_weights_offset(), R * I);
    double* g_bias = gradient_accumulator.data() + config.bias_offset();
    double* g_peep_out = gradient_accumulator.data() + config.peephole_output_offset();

    // Errors flowing into h and s, completed by successors before a point is visited.
    DeltaTape h_errors = output_deltas;
    std::vector<double> s_errors(points * N, 0.0);
    std::vector<double> dz(R);
    std::vector<double> ds(N);

    detail::Odometer pos(shape, true);
    for (std::size_t count = 0; count < points; ++count, pos.advance()) {
        const std::size_t p = pos.flat();
        const double* y = tape.activations.data() + p * R;
        const double* s = tape.states.data() + p * N;
        const double* ts = tape.squashed_states.data() + p * N;
        const double* eh = h_errors.at(p).data();
        const double* es = s_errors.data() + p * N;

        for (std::size_t b = 0; b < B; ++b) {
            const std::size_t orow = config.output_gate_row(b);
            const double omega = y[orow];
            double d_omega = 0.0;
            for (std::size_t c = 0; c < C; ++c) d_omega += eh[b * C + c] * ts[b * C + c];
            dz[orow] = d_omega * omega * (1.0 - omega);
            for (std::size_t c = 0; c < C; ++c) {
                const std::size_t cell = b * C + c;
                ds[cell] = es[cell] + eh[cell] * omega * (1.0 - ts[cell] * ts[cell]) + dz[orow] * peep_out[cell];
                g_peep_out[cell] += dz[orow] * s[cell];
            }

            const std::size_t irow = config.input_gate_row(b);
            const double iota = y[irow];
            double d_iota = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                const std::size_t cell = b * C + c;
                const double g = y[config.cell_input_row(cell)];
                d_iota += ds[cell] * g;
                dz[config.cell_input_row(cell)] = ds[cell] * iota * (1.0 - g * g);
            }
            dz[irow] = d_iota * iota * (1.0 - iota);

            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t frow = config.forget_gate_row(i, b);
                if (!pos.has_predecessor(i)) {
                    dz[frow] = 0.0;
                    continue;
                }
                const double* s_prev = tape.states.data() + (p - shape.stride(i)) * N;
                double d_phi = 0.0;
                for (std::size_t c = 0; c < C; ++c) d_phi += ds[b * C + c] * s_prev[b * C + c];
                const double phi = y[frow];
                dz[frow] = d_phi * phi * (1.0 - phi);
            }
        }

        outer_acc(g_in, R, I, dz.data(), input.at(p).data());
        for (std::size_t r = 0; r < R; ++r) g_bias[r] += dz[r];
        if (input_gradients) gemv_t_acc(w_in, R, I, dz.data(), input_gradients->at(p).data());

        for (std::size_t i = 0; i < n; ++i) {
            if (!pos.has_predecessor(i)) continue;
            const std::size_t q = p - shape.stride(i);
            const double* s_prev = tape.states.data() + q * N;
            outer_acc(gradient_accumulator.subspan(config.recurrent_offset(i), R * N), R, N, dz.data(),
                      tape.outputs.data() + q * N);
            gemv_t_acc(weights.subspan(config.recurrent_offset(i), R * N), R, N, dz.data(), h_errors.at(q).data());

            const double* peep_in = weights.data() + config.peephole_input_offset(i);
            const double* peep_f = weights.data() + config.peephole_forget_offset(i);
            double* g_peep_in = gradient_accumulator.data() + config.peephole_input_offset(i);
            double* g_peep_f = gradient_accumulator.data() + config.peephole_forget_offset(i);
            double* es_prev = s_errors.data() + q * N;
            for (std::size_t b = 0; b < B; ++b) {
                const double dz_i = dz[config.input_gate_row(b)];
                const double dz_f = dz[config.forget_gate_row(i, b)];
                const double phi = y[config.forget_gate_row(i, b)];
                for (std::size_t c = 0; c < C; ++c) {
                    const std::size_t cell = b * C + c;
                    g_peep_in[cell] += dz_i * s_prev[cell];
                    g_peep_f[cell] += dz_f * s_prev[cell];
                    es_prev[cell] += ds[cell] * phi + dz_f * peep_f[cell] + dz_i * peep_in[cell];
                }
            }
        }
    }
    return h_errors;
}

LstmBackwardResult lstm_backward(const LstmLayerConfig& config, std::span<const double> weights,
                                 const SequenceND& input, const LstmTape& tape, const DeltaTape& output_deltas) {
    LstmBackwardResult out{DeltaTape{}, LstmGradients(config), SequenceND(input.shape(), input.width())};
    out.output_errors = lstm_backward(config, weights, input, tape, output_deltas, out.gradients.values(),
                                      &out.input_gradients);
    return out;
}

}  // namespace mdrnn
