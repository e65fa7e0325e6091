#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mdrnn/dataset.hpp"
#include "mdrnn/grid.hpp"
#include "mdrnn/network.hpp"

namespace mdrnn {

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

std::size_t count_pixel_errors(const SequenceND& predictions, const LabelGrid& targets);
/// Fraction of points whose argmax class differs from the target.
double pixel_error(const SequenceND& predictions, const LabelGrid& targets);
double pixel_accuracy(const SequenceND& predictions, const LabelGrid& targets);

/// Digit (0..9) with the highest summed activation over all points; the
/// background class is excluded. Throws ConfigError unless the width is 11.
int cumulative_classify(const SequenceND& predictions);

struct EvalReport {
    std::size_t sequences = 0;
    std::size_t points = 0;
    std::size_t pixel_errors = 0;
    std::size_t images = 0;  ///< sequences with a whole-image digit
    std::size_t image_errors = 0;
    std::size_t num_classes = 0;
    std::vector<std::uint64_t> confusion;  ///< num_classes^2, row = target, column = prediction
    double loss = 0.0;                     ///< summed cross-entropy

    double pixel_error_rate() const { return points ? double(pixel_errors) / points : 0.0; }
    double image_error_rate() const { return images ? double(image_errors) / images : 0.0; }

    /// Associative combination of reports over disjoint shards.
    void merge(const EvalReport& other);

    /// Flat `key = value` lines.
    std::string to_key_value() const;
    /// Confusion matrix with a header row of predicted classes.
    std::string confusion_csv() const;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Report for one sequence given the network's output distributions.
EvalReport evaluate_sample(const SequenceND& predictions, const Sample& sample, double loss = 0.0);

/// Runs network_forward over every sample. `workers` > 1 evaluates shards in
/// parallel; the merged report does not depend on the worker count.
/// Throws DataError("no evaluation data") for an empty dataset.
EvalReport evaluate(const Network& net, const Dataset& dataset, std::size_t workers = 1);

struct ImagePrediction {
    std::string id;
    int target = -1;
    int predicted = -1;
    std::size_t pixel_errors = 0;
    std::size_t points = 0;
};

/// Per-sequence predictions, in dataset order.
std::vector<ImagePrediction> predict_images(const Network& net, const Dataset& dataset, std::size_t workers = 1);

}  // namespace mdrnn
