#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "mdrnn/errors.hpp"
#include "mdrnn/grid.hpp"

using namespace mdrnn;

namespace {

std::vector<Coord> collect(const Shape& s) {
    std::vector<Coord> out;
    for (const Coord& c : scan_order(s)) out.push_back(c);
    return out;
}

bool precedes_componentwise(const Coord& a, const Coord& b) {
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("scan order on a 2x2 grid is lexicographic") {
    const auto order = collect(Shape{2, 2});
    const std::vector<Coord> expected{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    CHECK(order == expected);
}

TEST_CASE("scan order of a single point") {
    const auto order = collect(Shape{1});
    REQUIRE(order.size() == 1);
    CHECK(order[0] == Coord{0});
}

TEST_CASE("scan order on (3,2,2) matches a brute-force valid ordering") {
    const Shape s{3, 2, 2};
    const auto order = collect(s);

    // Oracle: every coordinate, then a stable sort that only needs the
    // component-wise predecessor relation plus lexicographic tie-breaking.
    std::vector<Coord> all;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 2; ++c) all.push_back(Coord{a, b, c});
    std::sort(all.begin(), all.end());
    CHECK(order == all);

    const std::vector<Coord> first4{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {0, 1, 1}};
    CHECK(std::equal(first4.begin(), first4.end(), order.begin()));

    // every axis predecessor of a point is emitted strictly earlier
    for (std::size_t k = 0; k < order.size(); ++k)
        for (std::size_t axis = 0; axis < 3; ++axis)
            if (auto p = predecessor(order[k], axis)) {
                const auto at = std::find(order.begin(), order.end(), *p) - order.begin();
                CHECK(static_cast<std::size_t>(at) < k);
            }
}

TEST_CASE("scan order visits every point once") {
    for (const Shape& s : {Shape{5}, Shape{3, 4}, Shape{2, 3, 2}, Shape{1, 1, 1, 2}}) {
        const auto order = collect(s);
        const std::set<Coord> unique(order.begin(), order.end());
        CHECK(order.size() == s.point_count());
        CHECK(unique.size() == s.point_count());
        for (std::size_t p = 0; p < order.size(); ++p) CHECK(s.flat_index(order[p]) == p);
    }
}

TEST_CASE("reflect") {
    CHECK(reflect(Coord{1, 2}, Shape{4, 5}, 0b00) == Coord{1, 2});
    CHECK(reflect(Coord{1, 2}, Shape{4, 5}, 0b11) == Coord{2, 2});
    CHECK(reflect(Coord{1, 2}, Shape{4, 5}, 0b01) == Coord{2, 2});
    CHECK(reflect(Coord{1, 2}, Shape{4, 5}, 0b10) == Coord{1, 2});
    CHECK(reflect(reflect(Coord{0, 0}, Shape{3, 3}, 0b01), Shape{3, 3}, 0b01) == Coord{0, 0});
    CHECK_THROWS_AS(reflect(Coord{4, 0}, Shape{4, 5}, 0), PreconditionError);
    CHECK_THROWS_AS(reflect(Coord{0, 0}, Shape{4, 5}, 4), PreconditionError);
}

TEST_CASE("reflect is an involution on random shapes") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 3;
        std::vector<std::size_t> dims(n);
        for (auto& d : dims) d = 1 + rng() % 5;
        const Shape s(dims);
        for (std::uint32_t d = 0; d < direction_count(n); ++d)
            for (const Coord& c : scan_order(s)) CHECK(reflect(reflect(c, s, d), s, d) == c);
    }
}

TEST_CASE("predecessor") {
    CHECK_FALSE(predecessor(Coord{0, 3}, 0).has_value());
    CHECK(predecessor(Coord{2, 3}, 1) == Coord{2, 2});
    CHECK_FALSE(predecessor(Coord{1, 0}, 1).has_value());
}

TEST_CASE("reflection maps are self-inverse permutations") {
    const Shape s{3, 4};
    for (std::uint32_t d = 0; d < 4; ++d) {
        const auto map = reflection_map(s, d);
        std::vector<std::size_t> sorted = map;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t p = 0; p < sorted.size(); ++p) CHECK(sorted[p] == p);
        for (std::size_t p = 0; p < map.size(); ++p) CHECK(map[map[p]] == p);
        for (std::size_t p = 0; p < map.size(); ++p)
            CHECK(map[p] == s.flat_index(reflect(s.coord_of(p), s, d)));
    }
}

TEST_CASE("all directions together see every other point") {
    // Context of c in direction d: everything reachable from c by repeatedly
    // stepping to axis predecessors in the reflected frame.
    for (std::size_t rows = 1; rows <= 4; ++rows)
        for (std::size_t cols = 1; cols <= 4; ++cols) {
            const Shape s{rows, cols};
            for (const Coord& c : scan_order(s)) {
                std::set<Coord> seen;
                for (std::uint32_t d = 0; d < direction_count(2); ++d) {
                    std::function<void(const Coord&)> walk = [&](const Coord& local) {
                        for (std::size_t axis = 0; axis < 2; ++axis)
                            if (auto p = predecessor(local, axis)) {
                                seen.insert(reflect(*p, s, d));
                                walk(*p);
                            }
                    };
                    walk(reflect(c, s, d));
                }
                CHECK(seen.count(c) == 0);
                CHECK(seen.size() == s.point_count() - 1);
            }
        }
}

TEST_CASE("single direction context is the component-wise lower cone") {
    const Shape s{3, 4};
    for (const Coord& c : scan_order(s)) {
        std::set<Coord> seen;
        std::function<void(const Coord&)> walk = [&](const Coord& at) {
            for (std::size_t axis = 0; axis < 2; ++axis)
                if (auto p = predecessor(at, axis)) {
                    seen.insert(*p);
                    walk(*p);
                }
        };
        walk(c);
        for (const Coord& other : scan_order(s))
            CHECK(seen.count(other) == (other != c && precedes_componentwise(other, c) ? 1u : 0u));
    }
}

TEST_CASE("shape validation") {
    CHECK_THROWS_AS(Shape(std::vector<std::size_t>{}), ConfigError);
    CHECK_THROWS_AS((Shape{3, 0}), ConfigError);
    CHECK_THROWS_AS(Shape(std::vector<std::size_t>{1ull << 40, 1ull << 40}), ConfigError);
    const Shape s{2, 3, 4};
    CHECK(s.point_count() == 24);
    CHECK(s.stride(0) == 12);
    CHECK(s.stride(2) == 1);
    CHECK(s.coord_of(s.flat_index(Coord{1, 2, 3})) == Coord{1, 2, 3});
    CHECK_THROWS_AS(s.flat_index(Coord{2, 0, 0}), PreconditionError);
    CHECK_THROWS_AS(s.flat_index(Coord{0, 0}), PreconditionError);
}

TEST_CASE("sequence and label invariants") {
    CHECK_THROWS_AS(SequenceND(Shape{2}, 1, {0.0, std::nan("")}), DataError);
    CHECK_THROWS_AS(SequenceND(Shape{2}, 1, {0.0}), ConfigError);
    CHECK_THROWS_AS(LabelGrid(Shape{2}, 3, {0, 3}), DataError);

    SequenceND seq(Shape{2, 2}, 2, {0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(seq.at(Coord{1, 0})[1] == 5);
    const auto map = reflection_map(seq.shape(), 0b01);
    const auto flipped = seq.permuted(map);
    CHECK(flipped.at(Coord{0, 0})[0] == 4);
    CHECK(flipped.permuted(map) == seq);
}
