#include "mdrnn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "mdrnn/errors.hpp"

namespace mdrnn {

std::ostream& operator<<(std::ostream& os, const Coord& c) {
    os << '(';
    for (std::size_t i = 0; i < c.rank(); ++i) os << (i ? "," : "") << c[i];
    return os << ')';
}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ConfigError("shape needs at least one axis");
    strides_.assign(dims_.size(), 1);
    count_ = 1;
    for (std::size_t i = dims_.size(); i-- > 0;) {
        if (dims_[i] == 0) throw ConfigError("shape axis " + std::to_string(i) + " has length 0");
        strides_[i] = count_;
        if (count_ > std::numeric_limits<std::size_t>::max() / dims_[i])
            throw ConfigError("shape point count overflows the index type");
        count_ *= dims_[i];
    }
}

std::ostream& operator<<(std::ostream& os, const Shape& s) {
    os << '(';
    for (std::size_t i = 0; i < s.rank(); ++i) os << (i ? "," : "") << s[i];
    return os << ')';
}

bool Shape::contains(const Coord& c) const noexcept {
    if (c.rank() != dims_.size()) return false;
    for (std::size_t i = 0; i < dims_.size(); ++i)
        if (c[i] >= dims_[i]) return false;
    return true;
}

std::size_t Shape::flat_index(const Coord& c) const {
    if (!contains(c)) throw PreconditionError("coordinate outside grid");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < dims_.size(); ++i) flat += c[i] * strides_[i];
    return flat;
}

Coord Shape::coord_of(std::size_t flat) const {
    if (flat >= count_) throw PreconditionError("flat index outside grid");
    std::vector<std::size_t> comps(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        comps[i] = flat / strides_[i];
        flat %= strides_[i];
    }
    return Coord(std::move(comps));
}

ScanOrder::iterator::iterator(const Shape* shape, bool at_end) : shape_(shape), done_(at_end) {
    if (!done_) current_ = Coord(std::vector<std::size_t>(shape->rank(), 0));
}

ScanOrder::iterator& ScanOrder::iterator::operator++() {
    for (std::size_t axis = shape_->rank(); axis-- > 0;) {
        if (++current_[axis] < (*shape_)[axis]) return *this;
        current_[axis] = 0;
    }
    done_ = true;
    return *this;
}

ScanOrder scan_order(const Shape& shape) { return ScanOrder(shape); }

std::uint32_t direction_count(std::size_t rank) {
    if (rank >= 32) throw ConfigError("too many dimensions for multi-directional scanning");
    return std::uint32_t{1} << rank;
}

Coord reflect(const Coord& coord, const Shape& shape, std::uint32_t direction) {
    if (!shape.contains(coord)) throw PreconditionError("reflect: coordinate outside grid");
    if (direction >= direction_count(shape.rank())) throw PreconditionError("reflect: direction out of range");
    Coord out = coord;
    for (std::size_t i = 0; i < shape.rank(); ++i)
        if (direction & (1u << i)) out[i] = shape[i] - 1 - coord[i];
    return out;
}

std::optional<Coord> predecessor(const Coord& coord, std::size_t axis) {
    if (axis >= coord.rank()) throw PreconditionError("predecessor: axis out of range");
    if (coord[axis] == 0) return std::nullopt;
    Coord out = coord;
    --out[axis];
    return out;
}

std::vector<std::size_t> reflection_map(const Shape& shape, std::uint32_t direction) {
    if (direction >= direction_count(shape.rank())) throw PreconditionError("reflection_map: direction out of range");
    std::vector<std::size_t> map;
    map.reserve(shape.point_count());
    for (const Coord& local : scan_order(shape)) map.push_back(shape.flat_index(reflect(local, shape, direction)));
    return map;
}

SequenceND::SequenceND(Shape shape, std::size_t width)
    : shape_(std::move(shape)), width_(width), values_(shape_.point_count() * width, 0.0) {
    if (width == 0) throw ConfigError("sequence width must be positive");
}

SequenceND::SequenceND(Shape shape, std::size_t width, std::vector<double> values)
    : shape_(std::move(shape)), width_(width), values_(std::move(values)) {
    if (width == 0) throw ConfigError("sequence width must be positive");
    if (values_.size() != shape_.point_count() * width_)
        throw ConfigError("sequence storage holds " + std::to_string(values_.size()) + " values, expected " +
                          std::to_string(shape_.point_count() * width_));
    for (double v : values_)
        if (!std::isfinite(v)) throw DataError("sequence contains a non-finite value");
}

SequenceND SequenceND::permuted(std::span<const std::size_t> map) const {
    if (map.size() != point_count()) throw PreconditionError("permutation size does not match sequence");
    SequenceND out(shape_, width_);
    for (std::size_t p = 0; p < map.size(); ++p) {
        auto src = at(map[p]);
        std::copy(src.begin(), src.end(), out.at(p).begin());
    }
    return out;
}

LabelGrid::LabelGrid(Shape shape, std::size_t num_classes, std::vector<std::uint32_t> labels)
    : shape_(std::move(shape)), num_classes_(num_classes), labels_(std::move(labels)) {
    if (num_classes_ == 0) throw ConfigError("label grid needs at least one class");
    if (labels_.size() != shape_.point_count()) throw ConfigError("label count does not match shape");
    for (std::size_t p = 0; p < labels_.size(); ++p)
        if (labels_[p] >= num_classes_)
            throw DataError("label " + std::to_string(labels_[p]) + " at point " + std::to_string(p) +
                            " is not below class count " + std::to_string(num_classes_));
}

}  // namespace mdrnn
