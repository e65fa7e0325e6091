#pragma once

// Finite-difference verification of network gradients.

#include <cstdint>
#include <string>
#include <vector>

#include "mdrnn/grid.hpp"
#include "mdrnn/network.hpp"

namespace mdrnn {

struct GradcheckOptions {
    double step = 1e-5;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
    /// Analytic gradients are taken at deliberately perturbed weights. The
    /// check must then fail; used as a negative control.
    bool corrupt_weights = false;
};

struct GroupError {
    std::string group;
    std::size_t entries = 0;
    double max_relative_error = 0.0;
};

struct GradcheckReport {
    std::string name;
    std::vector<GroupError> groups;
    double max_relative_error = 0.0;
    bool passed = false;
};

/// |a - b| / max(|a|, |b|, floor). The floor keeps near-zero entries from
/// being judged on round-off alone.
double relative_error(double analytic, double numeric, double floor = 1e-3);

/// Central differences of the summed cross-entropy against network_backward,
/// for every parameter, aggregated per parameter group.
GradcheckReport check_gradients(const Network& net, const SequenceND& input, const LabelGrid& targets,
                                const GradcheckOptions& options, const std::string& name = "network");

struct GradcheckCase {
    std::string name;
    NetworkConfig config;
    Shape shape;
};

/// tanh and LSTM layers, n = 1, 2, 3, single- and multi-directional.
std::vector<GradcheckCase> default_gradcheck_cases();

/// Builds a random instance (weights, inputs, targets) for one case and checks it.
GradcheckReport run_gradcheck_case(const GradcheckCase& c, const GradcheckOptions& options);

}  // namespace mdrnn
