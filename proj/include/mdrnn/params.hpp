#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mdrnn {

/// A named contiguous slice of a flat parameter vector.
struct ParamGroup {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

/// Adds `prefix` to every group name and shifts offsets by `base`.
std::vector<ParamGroup> rebase(std::vector<ParamGroup> groups, const std::string& prefix, std::size_t base);

/// Name of the group containing flat index `index`, or "?" if none does.
std::string group_containing(const std::vector<ParamGroup>& groups, std::size_t index);

/// Row-major matrix view: y += M x, M is rows x cols.
void gemv_acc(std::span<const double> m, std::size_t rows, std::size_t cols, const double* x, double* y);
/// y += M^T x, M is rows x cols.
void gemv_t_acc(std::span<const double> m, std::size_t rows, std::size_t cols, const double* x, double* y);
/// M += x y^T, M is rows x cols.
void outer_acc(std::span<double> m, std::size_t rows, std::size_t cols, const double* x, const double* y);

}  // namespace mdrnn
