#pragma once

// n-dimensional grids: shapes, coordinates, the lexicographic scan order and
// the axis reflections used by multi-directional layers.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <iterator>
#include <optional>
#include <span>
#include <vector>

namespace mdrnn {

/// A point on an n-dimensional grid, one non-negative component per axis.
class Coord {
public:
    Coord() = default;
    explicit Coord(std::vector<std::size_t> components) : components_(std::move(components)) {}
    Coord(std::initializer_list<std::size_t> components) : components_(components) {}

    std::size_t rank() const noexcept { return components_.size(); }
    std::size_t operator[](std::size_t axis) const { return components_[axis]; }
    std::size_t& operator[](std::size_t axis) { return components_[axis]; }
    const std::vector<std::size_t>& components() const noexcept { return components_; }

    friend bool operator==(const Coord&, const Coord&) = default;
    friend auto operator<=>(const Coord&, const Coord&) = default;

private:
    std::vector<std::size_t> components_;
};

std::ostream& operator<<(std::ostream& os, const Coord& c);

/// Axis lengths (X_1, ..., X_n) of a dense row-major grid.
class Shape {
public:
    Shape() = default;
    /// Throws ConfigError when dims is empty, contains a zero, or overflows size_t.
    explicit Shape(std::vector<std::size_t> dims);
    Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

    std::size_t rank() const noexcept { return dims_.size(); }
    std::size_t operator[](std::size_t axis) const { return dims_[axis]; }
    const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    std::size_t point_count() const noexcept { return count_; }
    /// Flat-index distance between neighbours along `axis`.
    std::size_t stride(std::size_t axis) const { return strides_[axis]; }

    bool contains(const Coord& c) const noexcept;
    /// Throws PreconditionError when c is not inside the grid.
    std::size_t flat_index(const Coord& c) const;
    Coord coord_of(std::size_t flat) const;

    friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> strides_;
    std::size_t count_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Shape& s);

/// Forward range over every coordinate of a shape in lexicographic order,
/// last axis fastest. Row-major flat indices therefore come out as 0, 1, 2, ...
class ScanOrder {
public:
    class iterator {
    public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = Coord;
        using difference_type = std::ptrdiff_t;
        using pointer = const Coord*;
        using reference = const Coord&;

        iterator() = default;
        iterator(const Shape* shape, bool at_end);

        reference operator*() const { return current_; }
        pointer operator->() const { return &current_; }
        iterator& operator++();
        iterator operator++(int) {
            auto tmp = *this;
            ++*this;
            return tmp;
        }
        friend bool operator==(const iterator& a, const iterator& b) {
            return a.done_ == b.done_ && (a.done_ || a.current_ == b.current_);
        }

    private:
        const Shape* shape_ = nullptr;
        Coord current_;
        bool done_ = true;
    };

    explicit ScanOrder(Shape shape) : shape_(std::move(shape)) {}
    iterator begin() const { return iterator(&shape_, false); }
    iterator end() const { return iterator(&shape_, true); }

private:
    Shape shape_;
};

/// Every coordinate of `shape`, each exactly once, with all axis-predecessors
/// of a point emitted before the point itself.
ScanOrder scan_order(const Shape& shape);

/// Component i becomes X_i - 1 - c_i when bit i of `direction` is set.
/// Involution for a fixed direction. Throws PreconditionError on bad input.
Coord reflect(const Coord& coord, const Shape& shape, std::uint32_t direction);

/// The neighbour one step back along `axis`, or nullopt on the grid boundary.
std::optional<Coord> predecessor(const Coord& coord, std::size_t axis);

/// Flat-index permutation for a direction: entry p is the storage index of the
/// point whose reflected (layer-local) flat index is p.
std::vector<std::size_t> reflection_map(const Shape& shape, std::uint32_t direction);

/// Number of scan directions for an n-dimensional grid, 2^n.
std::uint32_t direction_count(std::size_t rank);

/// An n-dimensional grid of fixed-width real vectors.
class SequenceND {
public:
    SequenceND() = default;
    /// Zero-filled.
    SequenceND(Shape shape, std::size_t width);
    /// Throws ConfigError on a size mismatch and DataError on non-finite values.
    SequenceND(Shape shape, std::size_t width, std::vector<double> values);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t point_count() const noexcept { return shape_.point_count(); }

    std::span<const double> at(std::size_t flat) const { return {values_.data() + flat * width_, width_}; }
    std::span<double> at(std::size_t flat) { return {values_.data() + flat * width_, width_}; }
    std::span<const double> at(const Coord& c) const { return at(shape_.flat_index(c)); }
    std::span<double> at(const Coord& c) { return at(shape_.flat_index(c)); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Copy whose point p holds this sequence's point map[p].
    SequenceND permuted(std::span<const std::size_t> map) const;

    friend bool operator==(const SequenceND&, const SequenceND&) = default;

private:
    Shape shape_;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

/// One class index per grid point.
class LabelGrid {
public:
    LabelGrid() = default;
    /// Throws DataError if any label >= num_classes.
    LabelGrid(Shape shape, std::size_t num_classes, std::vector<std::uint32_t> labels);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::uint32_t operator[](std::size_t flat) const { return labels_[flat]; }
    std::span<const std::uint32_t> labels() const noexcept { return labels_; }

    friend bool operator==(const LabelGrid&, const LabelGrid&) = default;

private:
    Shape shape_;
    std::size_t num_classes_ = 0;
    std::vector<std::uint32_t> labels_;
};

}  // namespace mdrnn
