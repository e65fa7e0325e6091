#include "mdrnn/metrics.hpp"

#include <algorithm>
#include <exception>
#include <iomanip>
#include <sstream>
#include <thread>

#include "mdrnn/errors.hpp"

namespace mdrnn {

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] > values[best]) best = k;
    return best;
}

namespace {

void check_match(const SequenceND& predictions, const LabelGrid& targets) {
    if (!(predictions.shape() == targets.shape())) throw DataError("predictions and targets differ in shape");
    if (predictions.width() != targets.num_classes()) throw DataError("predictions and targets differ in class count");
}

}  // namespace

std::size_t count_pixel_errors(const SequenceND& predictions, const LabelGrid& targets) {
    check_match(predictions, targets);
    std::size_t errors = 0;
    for (std::size_t p = 0; p < predictions.point_count(); ++p)
        if (argmax(predictions.at(p)) != targets[p]) ++errors;
    return errors;
}

double pixel_error(const SequenceND& predictions, const LabelGrid& targets) {
    return double(count_pixel_errors(predictions, targets)) / predictions.point_count();
}

double pixel_accuracy(const SequenceND& predictions, const LabelGrid& targets) {
    return 1.0 - pixel_error(predictions, targets);
}

int cumulative_classify(const SequenceND& predictions) {
    if (predictions.width() != kDigitTaskClasses)
        throw ConfigError("cumulative classification needs 11 output classes, got " +
                          std::to_string(predictions.width()));
    std::vector<double> totals(10, 0.0);
    for (std::size_t p = 0; p < predictions.point_count(); ++p) {
        const auto dist = predictions.at(p);
        for (std::size_t k = 0; k < 10; ++k) totals[k] += dist[k];
    }
    return static_cast<int>(argmax(totals));
}

void EvalReport::merge(const EvalReport& other) {
    if (num_classes == 0) {
        num_classes = other.num_classes;
        confusion.assign(other.confusion.size(), 0);
    }
    if (other.num_classes != 0 && other.num_classes != num_classes)
        throw DataError("cannot merge reports with different class counts");
    sequences += other.sequences;
    points += other.points;
    pixel_errors += other.pixel_errors;
    images += other.images;
    image_errors += other.image_errors;
    loss += other.loss;
    for (std::size_t i = 0; i < other.confusion.size(); ++i) confusion[i] += other.confusion[i];
}

std::string EvalReport::to_key_value() const {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "sequences = " << sequences << '\n'
        << "points = " << points << '\n'
        << "pixel_errors = " << pixel_errors << '\n'
        << "pixel_error_rate = " << pixel_error_rate() << '\n'
        << "images = " << images << '\n'
        << "image_errors = " << image_errors << '\n'
        << "image_error_rate = " << image_error_rate() << '\n'
        << "num_classes = " << num_classes << '\n'
        << "loss = " << loss << '\n';
    return out.str();
}

std::string EvalReport::confusion_csv() const {
    std::ostringstream out;
    out << "target\\predicted";
    for (std::size_t k = 0; k < num_classes; ++k) out << ',' << k;
    out << '\n';
    for (std::size_t t = 0; t < num_classes; ++t) {
        out << t;
        for (std::size_t k = 0; k < num_classes; ++k) out << ',' << confusion[t * num_classes + k];
        out << '\n';
    }
    return out.str();
}

EvalReport evaluate_sample(const SequenceND& predictions, const Sample& sample, double loss) {
    check_match(predictions, sample.labels);
    EvalReport r;
    r.sequences = 1;
    r.points = predictions.point_count();
    r.num_classes = sample.labels.num_classes();
    r.confusion.assign(r.num_classes * r.num_classes, 0);
    r.loss = loss;
    for (std::size_t p = 0; p < r.points; ++p) {
        const std::size_t predicted = argmax(predictions.at(p));
        const std::size_t target = sample.labels[p];
        if (predicted != target) ++r.pixel_errors;
        ++r.confusion[target * r.num_classes + predicted];
    }
    if (sample.digit >= 0) {
        r.images = 1;
        r.image_errors = cumulative_classify(predictions) == sample.digit ? 0 : 1;
    }
    return r;
}

namespace {

// Runs fn(i) for every index, split into contiguous shards over `workers` threads.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn fn) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w * count / workers; i < (w + 1) * count / workers; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

EvalReport evaluate(const Network& net, const Dataset& dataset, std::size_t workers) {
    if (dataset.empty()) throw DataError("no evaluation data");
    std::vector<EvalReport> parts(dataset.size());
    parallel_for(dataset.size(), workers, [&](std::size_t i) {
        const auto forward = network_forward(net, dataset[i].input);
        try {
            parts[i] = evaluate_sample(forward.probabilities, dataset[i], cross_entropy(forward, dataset[i].labels));
        } catch (const DataError& e) {
            throw DataError("sequence " + (dataset[i].id.empty() ? std::to_string(i) : dataset[i].id) + ": " + e.what());
        }
    });
    EvalReport total;
    for (const auto& part : parts) total.merge(part);
    return total;
}

std::vector<ImagePrediction> predict_images(const Network& net, const Dataset& dataset, std::size_t workers) {
    std::vector<ImagePrediction> out(dataset.size());
    parallel_for(dataset.size(), workers, [&](std::size_t i) {
        const auto forward = network_forward(net, dataset[i].input);
        const auto& sample = dataset[i];
        out[i] = {sample.id.empty() ? std::to_string(i) : sample.id, sample.digit,
                  net.config().num_classes == kDigitTaskClasses ? cumulative_classify(forward.probabilities) : -1,
                  count_pixel_errors(forward.probabilities, sample.labels), sample.input.point_count()};
    });
    return out;
}

}  // namespace mdrnn
