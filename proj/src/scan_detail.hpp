#pragma once

#include <cstddef>
#include <vector>

#include "mdrnn/grid.hpp"

namespace mdrnn::detail {

/// Odometer over a shape's coordinates that also tracks the row-major flat index.
/// Runs forward (scan order) or backward (reverse scan order).
class Odometer {
public:
    Odometer(const Shape& shape, bool reverse) : shape_(shape), coord_(shape.rank(), 0), reverse_(reverse) {
        if (reverse_) {
            for (std::size_t i = 0; i < shape.rank(); ++i) coord_[i] = shape[i] - 1;
            flat_ = shape.point_count() - 1;
        }
    }

    std::size_t flat() const { return flat_; }
    std::size_t operator[](std::size_t axis) const { return coord_[axis]; }
    bool has_predecessor(std::size_t axis) const { return coord_[axis] > 0; }
    bool has_successor(std::size_t axis) const { return coord_[axis] + 1 < shape_[axis]; }

    void advance() {
        if (reverse_) {
            --flat_;
            for (std::size_t axis = shape_.rank(); axis-- > 0;) {
                if (coord_[axis] > 0) {
                    --coord_[axis];
                    return;
                }
                coord_[axis] = shape_[axis] - 1;
            }
        } else {
            ++flat_;
            for (std::size_t axis = shape_.rank(); axis-- > 0;) {
                if (++coord_[axis] < shape_[axis]) return;
                coord_[axis] = 0;
            }
        }
    }

private:
    const Shape& shape_;
    std::vector<std::size_t> coord_;
    std::size_t flat_ = 0;
    bool reverse_;
};

}  // namespace mdrnn::detail
