#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <random>
#include <vector>

#include "mosaic/rtree.hpp"

using mosaic::Box;
using mosaic::Interval;
using mosaic::Point;

namespace {

// Brute-force oracle the index must agree with.
struct LinearIndex {
  std::vector<std::pair<Box, int>> items;
  std::vector<std::size_t> query(const Box& w) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (items[i].first.intersects(w)) out.push_back(i);
    return out;
  }
};

Box random_box(std::mt19937& rng, std::size_t dim, double span, double max_side) {
  std::uniform_real_distribution<double> pos(-span, span);
  std::uniform_real_distribution<double> side(0.0, max_side);
  std::vector<Interval> dims;
  for (std::size_t i = 0; i < dim; ++i) {
    double a = pos(rng), w = side(rng);
    dims.emplace_back(a, a + w);
  }
  return Box(dims);
}

Point random_point_in(std::mt19937& rng, const Box& b) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Point p(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    p[i] = b[i].lo + (b[i].hi - b[i].lo) * d(rng);
  return p;
}

}  // namespace

TEST_CASE("insert then overlapping window finds the region", "[spatial]") {
  mosaic::RTree<int> idx(2);
  std::size_t id = idx.insert(Box({Interval(0, 1), Interval(0, 1)}), 0);
  auto hits = idx.window_query(Box({Interval(0.5, 2), Interval(0, 1)}));
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].id == id);
  CHECK(hits[0].value == 0);

  CHECK(idx.window_query(Box({Interval(5, 6), Interval(5, 6)})).empty());
  // Window equal to the stored box includes it.
  CHECK(idx.window_query(Box({Interval(0, 1), Interval(0, 1)})).size() == 1);
}

TEST_CASE("dimension mismatch rejected on insert and query", "[spatial]") {
  mosaic::RTree<int> idx(2);
  CHECK_THROWS_AS(idx.insert(Box({Interval(0, 1)}), 7), mosaic::Error);
  CHECK_THROWS_AS(idx.window_query(Box({Interval(0, 1)})), mosaic::Error);
  CHECK_THROWS_AS(idx.coverage_gaps(Box({Interval(0, 1)})), mosaic::Error);
}

TEST_CASE("window queries match the linear-scan oracle", "[spatial]") {
  auto rng = std::mt19937(20240215u);
  for (std::size_t dim : {1u, 2u, 3u}) {
    mosaic::RTree<int> idx(dim);
    LinearIndex oracle;
    const int n = dim == 2 ? 10000 : 2000;
    for (int i = 0; i < n; ++i) {
      Box b = random_box(rng, dim, 100.0, 5.0);
      std::size_t id = idx.insert(b, i);
      REQUIRE(id == oracle.items.size());  // ids dense and stable
      oracle.items.emplace_back(b, i);
    }
    for (int q = 0; q < 200; ++q) {
      Box w = random_box(rng, dim, 100.0, 20.0);
      auto got = idx.window_query(w);
      auto want = oracle.query(w);
      REQUIRE(got.size() == want.size());
      for (std::size_t k = 0; k < got.size(); ++k) {
        REQUIRE(got[k].id == want[k]);  // both sorted by id
        REQUIRE(got[k].value == oracle.items[want[k]].second);
      }
    }
  }
}

TEST_CASE("coverage gap trivial cases", "[spatial]") {
  mosaic::RTree<int> idx(1);
  idx.insert(Box({Interval(0, 1)}), 0);
  auto gaps = idx.coverage_gaps(Box({Interval(0, 2)}));
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0][0].lo == 1.0);
  CHECK(gaps[0][0].hi == 2.0);

  mosaic::RTree<int> full(2);
  full.insert(Box({Interval(0, 1), Interval(0, 1)}), 0);
  CHECK(full.coverage_gaps(Box({Interval(0, 1), Interval(0, 1)})).empty());
}

TEST_CASE("coverage gaps pass the membership sampling oracle", "[spatial]") {
  auto rng = std::mt19937(555u);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t dim = 1 + trial % 3;
    mosaic::RTree<int> idx(dim);
    std::vector<Box> stored;
    int n = 5 + trial * 3;
    for (int i = 0; i < n; ++i) {
      Box b = random_box(rng, dim, 4.0, 2.5);
      idx.insert(b, i);
      stored.push_back(b);
    }
    Box window = random_box(rng, dim, 4.0, 6.0);
    auto gaps = idx.coverage_gaps(window);

    for (const Box& g : gaps) REQUIRE(window.intersects(g));

    // Every window point is covered by a stored box or a gap; no point is
    // interior to both a stored box and a gap.
    for (int k = 0; k < 10000 / (trial + 1); ++k) {
      Point p = random_point_in(rng, window);
      bool in_stored = false;
      bool strictly_in_stored = false;
      for (const Box& s : stored) {
        if (s.contains(p)) in_stored = true;
        bool strict = true;
        for (std::size_t i = 0; i < dim; ++i)
          if (!(p[i] > s[i].lo && p[i] < s[i].hi)) strict = false;
        if (strict) strictly_in_stored = true;
      }
      bool in_gap = false;
      for (const Box& g : gaps)
        if (g.contains(p)) in_gap = true;
      REQUIRE((in_stored || in_gap));
      if (strictly_in_stored) REQUIRE_FALSE(in_gap);
    }
  }
}

TEST_CASE("gap fragments are pairwise interior-disjoint", "[spatial]") {
  auto rng = std::mt19937(808u);
  for (int trial = 0; trial < 30; ++trial) {
    mosaic::RTree<int> idx(2);
    for (int i = 0; i < 12; ++i) idx.insert(random_box(rng, 2, 3.0, 2.0), i);
    auto gaps = idx.coverage_gaps(Box({Interval(-4, 4), Interval(-4, 4)}));
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      for (std::size_t j = i + 1; j < gaps.size(); ++j) {
        double overlap = 1.0;
        for (std::size_t d = 0; d < 2; ++d) {
          double lo = std::max(gaps[i][d].lo, gaps[j][d].lo);
          double hi = std::min(gaps[i][d].hi, gaps[j][d].hi);
          overlap *= std::max(0.0, hi - lo);
        }
        REQUIRE(overlap == 0.0);
      }
    }
  }
}

TEST_CASE("query node visits grow sub-linearly (logged, non-blocking)", "[spatial]") {
  auto rng = std::mt19937(31337u);
  std::vector<std::size_t> sizes = {1000, 8000};
  std::vector<double> visits;
  for (std::size_t n : sizes) {
    mosaic::RTree<int> idx(2);
    for (std::size_t i = 0; i < n; ++i)
      idx.insert(random_box(rng, 2, 100.0, 1.0), static_cast<int>(i));
    std::size_t total = 0;
    const int queries = 100;
    for (int q = 0; q < queries; ++q)
      total += idx.count_query_nodes(random_box(rng, 2, 100.0, 2.0));
    visits.push_back(static_cast<double>(total) / queries);
  }
  double ratio = visits[1] / std::max(1.0, visits[0]);
  double size_ratio = static_cast<double>(sizes[1]) / sizes[0];
  std::printf("rtree visit scaling: %.1f -> %.1f avg nodes (x%.2f for x%.1f data)\n",
              visits[0], visits[1], ratio, size_ratio);
  CHECK(true);  // performance is logged only, never a hard gate
}
