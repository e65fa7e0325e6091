#include "mdrnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace mdrnn {

double relative_error(double analytic, double numeric, double floor) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / scale;
}

GradcheckReport check_gradients(const Network& net, const SequenceND& input, const LabelGrid& targets,
                                const GradcheckOptions& options, const std::string& name) {
    std::vector<double> analytic;
    if (options.corrupt_weights) {
        Network corrupted = net;
        std::mt19937_64 rng(options.seed ^ 0x5eedULL);
        std::uniform_real_distribution<double> noise(-0.05, 0.05);
        for (double& w : corrupted.params()) w += noise(rng);
        analytic = network_backward(corrupted, input, network_forward(corrupted, input), targets).gradients;
    } else {
        analytic = network_backward(net, input, network_forward(net, input), targets).gradients;
    }

    Network probe = net;
    auto params = probe.params();
    GradcheckReport report{name, {}, 0.0, false};
    for (const ParamGroup& g : net.groups()) {
        GroupError err{g.name, g.size, 0.0};
        for (std::size_t i = g.offset; i < g.offset + g.size; ++i) {
            const double saved = params[i];
            params[i] = saved + options.step;
            const double up = cross_entropy(network_forward(probe, input), targets);
            params[i] = saved - options.step;
            const double down = cross_entropy(network_forward(probe, input), targets);
            params[i] = saved;
            const double numeric = (up - down) / (2.0 * options.step);
            err.max_relative_error = std::max(err.max_relative_error, relative_error(analytic[i], numeric));
        }
        report.max_relative_error = std::max(report.max_relative_error, err.max_relative_error);
        report.groups.push_back(std::move(err));
    }
    report.passed = report.max_relative_error < options.tolerance;
    return report;
}

std::vector<GradcheckCase> default_gradcheck_cases() {
    std::vector<GradcheckCase> cases;
    const std::vector<Shape> shapes = {Shape{5}, Shape{3, 4}, Shape{2, 2, 2}};
    for (LayerKind kind : {LayerKind::tanh, LayerKind::lstm}) {
        for (const Shape& shape : shapes) {
            for (bool multi : {false, true}) {
                NetworkConfig c;
                c.num_dims = shape.rank();
                c.layer_kind = kind;
                c.input_width = 2;
                c.hidden_size = kind == LayerKind::tanh ? 3 : 2;
                c.cells_per_block = kind == LayerKind::lstm && shape.rank() == 1 ? 2 : 1;
                c.num_classes = 3;
                c.multidirectional = multi;
                std::string name = to_string(kind) + " n=" + std::to_string(shape.rank()) +
                                   (multi ? " multi-directional" : " single-direction");
                cases.push_back({std::move(name), c, shape});
            }
        }
    }
    return cases;
}

GradcheckReport run_gradcheck_case(const GradcheckCase& c, const GradcheckOptions& options) {
    Network net(c.config);
    initialize_uniform(net, options.seed, 0.5);
    std::mt19937_64 rng(options.seed + 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> values(c.shape.point_count() * c.config.input_width);
    for (double& v : values) v = normal(rng);
    std::uniform_int_distribution<std::uint32_t> label(0, static_cast<std::uint32_t>(c.config.num_classes - 1));
    std::vector<std::uint32_t> labels(c.shape.point_count());
    for (auto& l : labels) l = label(rng);
    const SequenceND input(c.shape, c.config.input_width, std::move(values));
    const LabelGrid targets(c.shape, c.config.num_classes, std::move(labels));
    return check_gradients(net, input, targets, options, c.name);
}

}  // namespace mdrnn
