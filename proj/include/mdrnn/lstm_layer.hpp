#pragma once

// Multi-dimensional LSTM hidden layer.
//
// Each memory block has one input gate, one output gate, one forget gate per
// dimension and C cells. A cell keeps one self-connection per dimension: with
// s_i and h_i the cell states and block outputs of the predecessor along axis i
// (zero on the boundary),
//
//   iota  = sigm(W_iota in + sum_i U_iota^i h_i + sum_i p_iota^i . s_i + b_iota)
//   phi^i = sigm(W_phi^i in + sum_j U_phi^i,j h_j + p_phi^i . s_i + b_phi^i)
//   g     = tanh(W_g in + sum_i U_g^i h_i + b_g)
//   s     = iota g + sum_i phi^i s_i
//   omega = sigm(W_omega in + sum_i U_omega^i h_i + p_omega . s + b_omega)
//   h     = omega tanh(s)
//
// so every cell carries 2n+1 peephole weights.

#include <cstddef>
#include <span>
#include <vector>

#include "mdrnn/grid.hpp"
#include "mdrnn/params.hpp"
#include "mdrnn/tanh_layer.hpp"

namespace mdrnn {

struct LstmLayerConfig {
    std::size_t num_dims = 2;
    std::size_t input_width = 1;
    std::size_t num_blocks = 1;
    std::size_t cells_per_block = 1;

    void validate() const;

    std::size_t cell_count() const { return num_blocks * cells_per_block; }
    /// Width of the layer output h, one value per cell.
    std::size_t output_width() const { return cell_count(); }

    // Pre-activation rows: input gates, forget gates (dimension-major), output
    // gates, then cell inputs.
    std::size_t row_count() const { return num_blocks * (2 + num_dims) + cell_count(); }
    std::size_t input_gate_row(std::size_t block) const { return block; }
    std::size_t forget_gate_row(std::size_t axis, std::size_t block) const { return num_blocks * (1 + axis) + block; }
    std::size_t output_gate_row(std::size_t block) const { return num_blocks * (1 + num_dims) + block; }
    std::size_t cell_input_row(std::size_t cell) const { return num_blocks * (2 + num_dims) + cell; }

    // Flat parameter layout: input weights, recurrent weights per dimension,
    // peepholes (input gate per dimension, forget gate per dimension, output
    // gate), biases.
    std::size_t input_weights_offset() const { return 0; }
    std::size_t recurrent_offset(std::size_t axis) const {
        return row_count() * input_width + axis * row_count() * cell_count();
    }
    std::size_t peephole_input_offset(std::size_t axis) const {
        return recurrent_offset(num_dims) + axis * cell_count();
    }
    std::size_t peephole_forget_offset(std::size_t axis) const {
        return peephole_input_offset(num_dims) + axis * cell_count();
    }
    std::size_t peephole_output_offset() const { return peephole_forget_offset(num_dims); }
    std::size_t bias_offset() const { return peephole_output_offset() + cell_count(); }
    std::size_t parameter_count() const { return bias_offset() + row_count(); }
    std::size_t peepholes_per_cell() const { return 2 * num_dims + 1; }

    std::vector<ParamGroup> groups() const;
};

/// Owning parameter vector for one LSTM layer; also used for gradients.
class LstmWeights {
public:
    explicit LstmWeights(const LstmLayerConfig& config);
    LstmWeights(const LstmLayerConfig& config, std::vector<double> values);

    const LstmLayerConfig& config() const noexcept { return config_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    std::span<double> input_weights();
    std::span<double> recurrent(std::size_t axis);
    std::span<double> peephole_input(std::size_t axis);
    std::span<double> peephole_forget(std::size_t axis);
    std::span<double> peephole_output();
    std::span<double> bias();

private:
    LstmLayerConfig config_;
    std::vector<double> values_;
};

using LstmGradients = LstmWeights;

/// Forward state at every point. Gate rows of `activations` hold sigmoid
/// outputs, cell-input rows hold g = tanh(pre-activation).
struct LstmTape {
    Shape shape;
    std::size_t rows = 0;
    std::size_t cells = 0;
    std::vector<double> pre_activations;  ///< rows per point
    std::vector<double> activations;      ///< rows per point
    std::vector<double> states;           ///< s, cells per point
    std::vector<double> squashed_states;  ///< tanh(s), cells per point
    std::vector<double> outputs;          ///< h, cells per point

    std::span<const double> gates(std::size_t flat) const { return {activations.data() + flat * rows, rows}; }
    std::span<const double> s(std::size_t flat) const { return {states.data() + flat * cells, cells}; }
    std::span<const double> h(std::size_t flat) const { return {outputs.data() + flat * cells, cells}; }
};

struct LstmBackwardResult {
    DeltaTape output_errors;  ///< total d objective / d h at every point
    LstmGradients gradients;
    SequenceND input_gradients;
};

LstmTape lstm_forward(const LstmLayerConfig& config, std::span<const double> weights, const SequenceND& input);

/// `output_deltas` holds d objective / d h injected from above (width B*C).
/// Gradients are added into `gradient_accumulator`. Returns the total error
/// reaching each block output, including recurrent contributions.
DeltaTape lstm_backward(const LstmLayerConfig& config, std::span<const double> weights, const SequenceND& input,
                        const LstmTape& tape, const DeltaTape& output_deltas, std::span<double> gradient_accumulator,
                        SequenceND* input_gradients);

LstmBackwardResult lstm_backward(const LstmLayerConfig& config, std::span<const double> weights,
                                 const SequenceND& input, const LstmTape& tape, const DeltaTape& output_deltas);

}  // namespace mdrnn
