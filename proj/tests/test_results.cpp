#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mosaic/results.hpp"

using mosaic::Box;
using mosaic::HistogramBin;
using mosaic::Interval;
using mosaic::RegionResult;
using mosaic::RegionVerdict;

namespace {

RegionResult region(std::initializer_list<Interval> dims, double bound,
                    RegionVerdict v = RegionVerdict::safe, int generation = 0) {
  RegionResult r;
  r.box = Box(std::vector<Interval>(dims));
  r.upper_bound = bound;
  r.verdict = v;
  r.generation = generation;
  return r;
}

// Uniform grid over [0,1]^2 with pseudo-random bounds.
std::vector<RegionResult> unit_grid(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RegionResult> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double s = 1.0 / static_cast<double>(n);
      out.push_back(region({Interval(i * s, (i + 1) * s), Interval(j * s, (j + 1) * s)},
                           u(rng)));
    }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("safe set keeps exactly the regions strictly below the threshold", "[results]") {
  const std::vector<RegionResult> rs = {
      region({Interval(0, 1)}, 0.0),
      region({Interval(1, 2)}, 0.01),
      region({Interval(2, 3)}, 0.2),
      region({Interval(3, 4)}, 0.9),
  };
  CHECK(mosaic::safe_set(rs, 0.01).size() == 1);  // only the 0.0 region
  CHECK(mosaic::safe_set(rs, 0.2).size() == 2);   // 0.2 itself is excluded
  CHECK(mosaic::safe_set(rs, 1.1).size() == 4);
  CHECK(mosaic::safe_set(rs, 0.0).empty());
  CHECK(mosaic::safe_set({}, 0.5).empty());
}

TEST_CASE("worst case over a fully covered query", "[results]") {
  const std::vector<RegionResult> rs = {
      region({Interval(0, 1), Interval(0, 1)}, 0.1),
      region({Interval(1, 2), Interval(0, 1)}, 0.4),
  };
  CHECK(mosaic::worst_case(rs, rs[0].box) == 0.1);
  CHECK(mosaic::worst_case(rs, rs[1].box) == 0.4);
  CHECK(mosaic::worst_case(rs, Box({Interval(0.5, 1.5), Interval(0.2, 0.8)})) == 0.4);
  CHECK(mosaic::worst_case(rs, Box({Interval(0, 2), Interval(0, 1)})) == 0.4);
  // A query inside a single region reports that region's bound.
  CHECK(mosaic::worst_case(rs, Box({Interval(0.2, 0.3), Interval(0.2, 0.3)})) == 0.1);
  // A point query on a shared face conservatively takes both neighbors.
  CHECK(mosaic::worst_case(rs, Box({Interval(1, 1), Interval(0.5, 0.5)})) == 0.4);
  CHECK(mosaic::worst_case(rs, Box({Interval(0.5, 0.5), Interval(0.5, 0.5)})) == 0.1);
}

TEST_CASE("worst case rejects queries leaving the analyzed regions", "[results]") {
  const std::vector<RegionResult> rs = {
      region({Interval(0, 1), Interval(0, 1)}, 0.25),
  };
  CHECK_THROWS_AS(mosaic::worst_case(rs, Box({Interval(0.5, 1.5), Interval(0, 1)})),
                  mosaic::Error);
  CHECK_THROWS_AS(mosaic::worst_case(rs, Box({Interval(2, 3), Interval(0, 1)})),
                  mosaic::Error);
  CHECK_THROWS_AS(mosaic::worst_case({}, Box({Interval(0, 1), Interval(0, 1)})),
                  mosaic::Error);
  try {
    mosaic::worst_case(rs, Box({Interval(0.5, 1.5), Interval(0, 1)}));
    FAIL("expected an uncovered-query error");
  } catch (const mosaic::Error& e) {
    CHECK(e.code() == mosaic::errc::uncovered);
  }
  CHECK_THROWS_AS(mosaic::worst_case(rs, Box({Interval(0, 1)})), mosaic::Error);
}

TEST_CASE("worst case grows with the query", "[results]") {
  std::mt19937 rng(20240918);
  const auto rs = unit_grid(rng, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    double a0 = u(rng), a1 = u(rng), b0 = u(rng), b1 = u(rng);
    if (a0 > a1) std::swap(a0, a1);
    if (b0 > b1) std::swap(b0, b1);
    const Box inner({Interval(a0, a1), Interval(b0, b1)});
    const double grow = 0.5 * u(rng);
    const Box outer({Interval(std::max(0.0, a0 - grow), std::min(1.0, a1 + grow)),
                     Interval(std::max(0.0, b0 - grow), std::min(1.0, b1 + grow))});
    CHECK(mosaic::worst_case(rs, inner) <= mosaic::worst_case(rs, outer));
  }
}

TEST_CASE("histogram groups volume by bound", "[results]") {
  const std::vector<RegionResult> rs = {
      region({Interval(0, 2), Interval(0, 1)}, 0.3),
  };
  const auto one = mosaic::volume_histogram(rs, {0.0, 1.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].lo == 0.0);
  CHECK(one[0].hi == 1.0);
  CHECK(one[0].volume == Catch::Approx(2.0));

  const std::vector<RegionResult> mixed = {
      region({Interval(0, 1)}, 0.0),   // first bin, left edge closed
      region({Interval(1, 3)}, 0.2),   // first bin
      region({Interval(3, 4)}, 0.75),  // second bin
      region({Interval(4, 6)}, 1.0),   // last bin is closed at 1
  };
  const auto bins = mosaic::volume_histogram(mixed, {0.0, 0.5, 1.0});
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].volume == Catch::Approx(3.0));
  CHECK(bins[1].volume == Catch::Approx(3.0));
}

TEST_CASE("histogram bins are left-closed", "[results]") {
  // A bound equal to an interior edge belongs to the bin starting there.
  const std::vector<RegionResult> rs = {
      region({Interval(0, 1), Interval(0, 1)}, 0.5),
  };
  const auto bins = mosaic::volume_histogram(rs, {0.0, 0.5, 1.0});
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].volume == 0.0);
  CHECK(bins[1].volume == Catch::Approx(1.0));
}

TEST_CASE("histogram conserves total volume", "[results]") {
  std::mt19937 rng(99);
  const auto rs = unit_grid(rng, 5);
  double total = 0.0;
  for (const RegionResult& r : rs) total += r.box.volume();
  const auto bins = mosaic::volume_histogram(rs, {0.0, 0.1, 0.25, 0.5, 0.9, 1.0});
  double binned = 0.0;
  for (const HistogramBin& b : bins) binned += b.volume;
  CHECK(binned == Catch::Approx(total).epsilon(1e-9));
}

TEST_CASE("histogram validates its edges", "[results]") {
  const std::vector<RegionResult> rs = {region({Interval(0, 1)}, 0.5)};
  CHECK_THROWS_AS(mosaic::volume_histogram(rs, {0.5}), mosaic::Error);
  CHECK_THROWS_AS(mosaic::volume_histogram(rs, {0.0, 0.5, 0.5, 1.0}), mosaic::Error);
  CHECK_THROWS_AS(mosaic::volume_histogram(rs, {0.0, 0.6, 0.3, 1.0}), mosaic::Error);
  CHECK_THROWS_AS(mosaic::volume_histogram(rs, {0.1, 1.0}), mosaic::Error);
  CHECK_THROWS_AS(mosaic::volume_histogram(rs, {0.0, 0.9}), mosaic::Error);
  try {
    mosaic::volume_histogram(rs, {0.5});
    FAIL("expected a bad-bins error");
  } catch (const mosaic::Error& e) {
    CHECK(e.code() == mosaic::errc::bad_bins);
  }
  // Edges may extend beyond [0, 1] as long as they cover it.
  CHECK_NOTHROW(mosaic::volume_histogram(rs, {-1.0, 2.0}));
}

TEST_CASE("region table round-trips through CSV", "[results]") {
  const std::vector<RegionResult> rs = {
      region({Interval(-0.35, 0.0), Interval(-0.5, 0.0)}, 1.0 / 3.0, RegionVerdict::unsafe, 2),
      region({Interval(0.0, 0.35), Interval(0.0, 0.5)}, 0.0, RegionVerdict::safe, 0),
  };
  std::ostringstream out;
  mosaic::export_regions_csv(rs, out);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "dim0_lo,dim0_hi,dim1_lo,dim1_hi,upper_bound,verdict,generation");

  REQUIRE(std::getline(in, line));
  {
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 7);
    CHECK(std::stod(cells[0]) == -0.35);
    CHECK(std::stod(cells[3]) == 0.0);
    CHECK(std::stod(cells[4]) == 1.0 / 3.0);  // %.17g survives the round trip
    CHECK(cells[5] == "unsafe");
    CHECK(cells[6] == "2");
  }
  REQUIRE(std::getline(in, line));
  CHECK(line.find("safe,0") != std::string::npos);
  CHECK_FALSE(std::getline(in, line));

  std::ostringstream empty;
  mosaic::export_regions_csv({}, empty);
  CHECK(empty.str() == "upper_bound,verdict,generation\n");
}

TEST_CASE("region table exports to JSON", "[results]") {
  const std::vector<RegionResult> rs = {
      region({Interval(0, 1), Interval(2, 3)}, 0.25, RegionVerdict::precision_limited, 3),
  };
  const nlohmann::json j = mosaic::regions_to_json(rs);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 1);
  CHECK(j[0]["upper_bound"].get<double>() == 0.25);
  CHECK(j[0]["verdict"].get<std::string>() == "precision_limited");
  CHECK(j[0]["generation"].get<int>() == 3);
  REQUIRE(j[0]["box"].size() == 2);
  CHECK(j[0]["box"][1][0].get<double>() == 2.0);
  CHECK(j[0]["box"][1][1].get<double>() == 3.0);

  const std::string path = "/tmp/mosaic_test_regions.json";
  mosaic::export_regions_json(rs, path);
  const nlohmann::json back = nlohmann::json::parse(slurp(path));
  CHECK(back == j);
  std::remove(path.c_str());
}

TEST_CASE("heatmap renders 2-D regions only", "[results]") {
  const std::vector<RegionResult> rs = {
      region({Interval(0, 1), Interval(0, 1)}, 0.0),
      region({Interval(1, 2), Interval(0, 1)}, 1.0),
      region({Interval(0, 2), Interval(1, 2)}, 0.5),
  };
  const std::string path = "/tmp/mosaic_test_heatmap.svg";
  mosaic::export_heatmap_svg(rs, path);
  const std::string svg = slurp(path);
  CHECK(svg.find("<svg") != std::string::npos);
  std::size_t rects = 0;
  for (std::size_t pos = 0; (pos = svg.find("<rect", pos)) != std::string::npos; ++pos)
    ++rects;
  CHECK(rects == rs.size());
  CHECK(svg.find("rgb(0,0,255)") != std::string::npos);    // bound 0 is pure blue
  CHECK(svg.find("rgb(255,0,0)") != std::string::npos);    // bound 1 is pure red
  CHECK(svg.find("rgb(128,0,127)") != std::string::npos);  // midpoint of the ramp
  std::remove(path.c_str());

  CHECK_THROWS_AS(mosaic::export_heatmap_svg({region({Interval(0, 1)}, 0.5)}, path),
                  mosaic::Error);
  CHECK_THROWS_AS(
      mosaic::export_heatmap_svg(
          {region({Interval(0, 1), Interval(0, 1), Interval(0, 1)}, 0.5)}, path),
      mosaic::Error);
  CHECK_THROWS_AS(mosaic::export_heatmap_svg({}, path), mosaic::Error);
}
