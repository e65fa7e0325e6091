#pragma once

// Online gradient descent with classical momentum: one weight update per
// training sequence, validation-based model selection.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mdrnn/dataset.hpp"
#include "mdrnn/network.hpp"

namespace mdrnn {

struct TrainConfig {
    double learning_rate = 1e-5;
    double momentum = 0.9;
    std::size_t max_epochs = 100;
    /// Epochs without a validation improvement tolerated before stopping.
    std::size_t patience = 20;
    std::uint64_t rng_seed = 0;
    bool shuffle = true;
    /// Element-wise gradient clip; 0 disables it.
    double gradient_clip = 0.0;
    /// Threads used for validation passes.
    std::size_t workers = 1;
    /// Stop once the training pixel error of an epoch falls below this; 0 disables it.
    double target_train_error = 0.0;

    void validate() const;
};

struct MomentumState {
    std::vector<double> velocity;

    MomentumState() = default;
    explicit MomentumState(std::size_t size) : velocity(size, 0.0) {}
};

/// v <- momentum v - lr g;  w <- w + v. Throws TrainingError naming the group
/// of the first non-finite gradient.
void sgd_step(Network& net, std::span<const double> gradients, MomentumState& state, const TrainConfig& config);

struct EpochSummary {
    double mean_loss = 0.0;    ///< cross-entropy per point
    double pixel_error = 0.0;  ///< measured on each sequence before its update
    std::size_t updates = 0;
    std::size_t points = 0;
};

/// One pass over `dataset` (shuffled with `rng` when enabled): forward,
/// backward and sgd_step per sequence. Throws DataError("no training data")
/// for an empty dataset; other data errors name the sequence.
EpochSummary train_epoch(Network& net, const Dataset& dataset, const TrainConfig& config, MomentumState& state,
                         std::mt19937_64& rng);

struct LogRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_pixel_error = 0.0;
    double validation_pixel_error = 0.0;
    double seconds = -1.0;  ///< negative when timing is not recorded

    friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

/// Tab-separated: epoch, mean training loss, training pixel error, validation
/// pixel error, wall-clock seconds ("-" when not recorded).
std::string format_log_record(const LogRecord& record);

struct FitResult {
    Network best;
    Network final;
    std::size_t best_epoch = 0;
    double best_validation_error = 1.0;
    std::vector<LogRecord> log;
    std::string rng_state;  ///< shuffle generator state after the last epoch
};

/// Trains `net` until max_epochs or until `patience` epochs pass without a
/// lower validation pixel error, keeping the best network seen.
/// `record_time` fills LogRecord::seconds.
FitResult fit(Network net, const Dataset& train, const Dataset& validation, const TrainConfig& config,
              const std::function<void(const LogRecord&)>& on_epoch = {}, bool record_time = false);

}  // namespace mdrnn
