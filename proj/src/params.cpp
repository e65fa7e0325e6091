#include "mdrnn/params.hpp"

namespace mdrnn {

std::vector<ParamGroup> rebase(std::vector<ParamGroup> groups, const std::string& prefix, std::size_t base) {
    for (auto& g : groups) {
        g.name = prefix + g.name;
        g.offset += base;
    }
    return groups;
}

std::string group_containing(const std::vector<ParamGroup>& groups, std::size_t index) {
    for (const auto& g : groups)
        if (index >= g.offset && index < g.offset + g.size) return g.name;
    return "?";
}

void gemv_acc(std::span<const double> m, std::size_t rows, std::size_t cols, const double* x, double* y) {
    const double* row = m.data();
    for (std::size_t r = 0; r < rows; ++r, row += cols) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) sum += row[c] * x[c];
        y[r] += sum;
    }
}

void gemv_t_acc(std::span<const double> m, std::size_t rows, std::size_t cols, const double* x, double* y) {
    const double* row = m.data();
    for (std::size_t r = 0; r < rows; ++r, row += cols) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
    }
}

void outer_acc(std::span<double> m, std::size_t rows, std::size_t cols, const double* x, const double* y) {
    double* row = m.data();
    for (std::size_t r = 0; r < rows; ++r, row += cols) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        for (std::size_t c = 0; c < cols; ++c) row[c] += xr * y[c];
    }
}

}  // namespace mdrnn
