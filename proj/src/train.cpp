#include "mdrnn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "mdrnn/errors.hpp"
#include "mdrnn/metrics.hpp"

namespace mdrnn {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
    if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
    if (gradient_clip < 0.0) throw ConfigError("gradient_clip must be non-negative");
    if (target_train_error < 0.0 || target_train_error > 1.0) throw ConfigError("target_train_error must be in [0,1]");
}

void sgd_step(Network& net, std::span<const double> gradients, MomentumState& state, const TrainConfig& config) {
    auto params = net.params();
    if (gradients.size() != params.size() || state.velocity.size() != params.size())
        throw PreconditionError("gradient and momentum buffers must match the network");
    for (std::size_t i = 0; i < gradients.size(); ++i)
        if (!std::isfinite(gradients[i]))
            throw TrainingError("non-finite gradient in parameter group " + group_containing(net.groups(), i));
    const double clip = config.gradient_clip;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = clip > 0.0 ? std::clamp(gradients[i], -clip, clip) : gradients[i];
        state.velocity[i] = config.momentum * state.velocity[i] - config.learning_rate * g;
        params[i] += state.velocity[i];
    }
}

EpochSummary train_epoch(Network& net, const Dataset& dataset, const TrainConfig& config, MomentumState& state,
                         std::mt19937_64& rng) {
    if (dataset.empty()) throw DataError("no training data");
    if (state.velocity.size() != net.parameter_count()) state = MomentumState(net.parameter_count());
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);

    EpochSummary summary;
    double loss = 0.0;
    std::size_t errors = 0;
    for (std::size_t i : order) {
        const Sample& sample = dataset[i];
        try {
            const auto forward = network_forward(net, sample.input);
            const auto backward = network_backward(net, sample.input, forward, sample.labels);
            loss += backward.loss;
            errors += count_pixel_errors(forward.probabilities, sample.labels);
            summary.points += sample.input.point_count();
            sgd_step(net, backward.gradients, state, config);
            ++summary.updates;
        } catch (const DataError& e) {
            throw DataError("sequence " + (sample.id.empty() ? std::to_string(i) : sample.id) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("sequence " + (sample.id.empty() ? std::to_string(i) : sample.id) + ": " + e.what());
        }
    }
    summary.mean_loss = loss / summary.points;
    summary.pixel_error = double(errors) / summary.points;
    return summary;
}

std::string format_log_record(const LogRecord& r) {
    std::ostringstream out;
    out << r.epoch << '\t' << std::setprecision(10) << r.train_loss << '\t' << r.train_pixel_error << '\t'
        << r.validation_pixel_error << '\t';
    if (r.seconds < 0.0)
        out << '-';
    else
        out << std::fixed << std::setprecision(3) << r.seconds;
    return out.str();
}

FitResult fit(Network net, const Dataset& train, const Dataset& validation, const TrainConfig& config,
              const std::function<void(const LogRecord&)>& on_epoch, bool record_time) {
    config.validate();
    if (train.empty()) throw DataError("no training data");
    if (validation.empty()) throw DataError("no validation data");

    std::mt19937_64 rng(config.rng_seed);
    MomentumState state(net.parameter_count());
    FitResult result{net, net, 0, 2.0, {}, {}};
    std::size_t since_improvement = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        const EpochSummary summary = train_epoch(net, train, config, state, rng);
        const EvalReport report = evaluate(net, validation, config.workers);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        LogRecord record{epoch, summary.mean_loss, summary.pixel_error, report.pixel_error_rate(),
                         record_time ? seconds : -1.0};
        result.log.push_back(record);
        if (on_epoch) on_epoch(record);

        if (record.validation_pixel_error < result.best_validation_error) {
            result.best_validation_error = record.validation_pixel_error;
            result.best_epoch = epoch;
            result.best = net;
            since_improvement = 0;
        } else if (++since_improvement > config.patience) {
            break;
        }
        if (config.target_train_error > 0.0 && summary.pixel_error < config.target_train_error) break;
    }
    result.final = std::move(net);
    std::ostringstream rng_state;
    rng_state << rng;
    result.rng_state = rng_state.str();
    return result;
}

}  // namespace mdrnn
