#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "mosaic/refinement.hpp"

using mosaic::Box;
using mosaic::BuildOptions;
using mosaic::Environment;
using mosaic::FaultModel;
using mosaic::Interval;
using mosaic::Network;
using mosaic::Point;
using mosaic::RefineOptions;
using mosaic::RegionResult;
using mosaic::RegionVerdict;

namespace {

Network constant_net2(std::size_t winner) {
  std::vector<std::vector<double>> W(2, std::vector<double>{0.0, 0.0});
  std::vector<double> b(2, 0.0);
  b[winner] = 10.0;
  return Network(2, {mosaic::affine_layer(W, b)});
}

// Pushes against the sign of theta: action 0 (negative torque) on theta > 0.
Network stabilizing_net() {
  return Network(2, {mosaic::affine_layer({{1, 0}, {-1, 0}}, {0, 0})});
}

std::vector<RegionResult> classify_cells(const Network& net, const Environment& env,
                                         const FaultModel& fault, const std::vector<Box>& cells,
                                         const BuildOptions& build, double p_safe,
                                         mosaic::ActionRegionCache* cache = nullptr) {
  std::vector<RegionResult> out;
  for (const Box& cell : cells) {
    RegionResult r;
    r.box = cell;
    r.upper_bound = mosaic::region_bound(net, env, fault, cell, build, cache);
    r.verdict = mosaic::classify_region(r.upper_bound, cell.max_width(), p_safe, build.eps);
    out.push_back(std::move(r));
  }
  return out;
}

double total_volume(const std::vector<RegionResult>& rs) {
  double v = 0.0;
  for (const RegionResult& r : rs) v += r.box.volume();
  return v;
}

double safe_volume(const std::vector<RegionResult>& rs, double p_safe) {
  double v = 0.0;
  for (const Box& b : mosaic::safe_set(rs, p_safe)) v += b.volume();
  return v;
}

Point random_point_in(std::mt19937& rng, const Box& b) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Point p(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    p[i] = b[i].lo + (b[i].hi - b[i].lo) * d(rng);
  return p;
}

}  // namespace

TEST_CASE("verdict classification", "[refinement]") {
  CHECK(mosaic::classify_region(0.1, 1.0, 0.2, 0.01) == RegionVerdict::safe);
  CHECK(mosaic::classify_region(0.3, 0.2, 0.2, 0.1) == RegionVerdict::unsafe);
  CHECK(mosaic::classify_region(0.3, 0.05, 0.2, 0.1) == RegionVerdict::precision_limited);
  // The safety threshold is strict: a bound equal to p_safe is not safe.
  CHECK(mosaic::classify_region(0.2, 1.0, 0.2, 0.01) != RegionVerdict::safe);
}

TEST_CASE("all-safe input is a fixpoint", "[refinement]") {
  const Environment env = Environment::pendulum();
  const Network net = stabilizing_net();
  const FaultModel fault = FaultModel::fault_free(2);
  BuildOptions build;
  build.horizon = 2;
  build.eps = 0.1;
  RefineOptions opt;
  opt.p_safe = 0.2;
  opt.max_rounds = 10;

  const auto input = classify_cells(net, env, fault, mosaic::initial_grid(env, {0.35, 0.5}),
                                    build, opt.p_safe);
  for (const RegionResult& r : input) REQUIRE(r.verdict == RegionVerdict::safe);

  const auto output = mosaic::refine(net, env, fault, input, build, opt);
  REQUIRE(output.size() == input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    CHECK(output[i].box[0].lo == input[i].box[0].lo);
    CHECK(output[i].box[1].hi == input[i].box[1].hi);
    CHECK(output[i].upper_bound == input[i].upper_bound);
    CHECK(output[i].generation == input[i].generation);
  }
}

TEST_CASE("zero rounds returns the input unchanged", "[refinement]") {
  mosaic::PendulumParams p;
  p.theta_fail = 0.2;
  const Environment env =
      Environment::pendulum(p, Box({Interval(0.1, 0.3), Interval(-0.05, 0.05)}));
  const Network net = stabilizing_net();
  BuildOptions build;
  build.horizon = 2;
  build.eps = 0.02;
  RefineOptions opt;
  opt.p_safe = 0.2;
  opt.max_rounds = 0;

  const auto input = classify_cells(net, env, FaultModel::fault_free(2),
                                    {env.init_region()}, build, opt.p_safe);
  REQUIRE(input.at(0).verdict == RegionVerdict::unsafe);
  const auto output = mosaic::refine(net, env, FaultModel::fault_free(2), input, build, opt);
  REQUIRE(output.size() == 1);
  CHECK(output[0].upper_bound == input[0].upper_bound);
  CHECK(output[0].generation == 0);
}

TEST_CASE("one split separates the failing slice from the recoverable one", "[refinement]") {
  // Initial region [0.1, 0.3] x [-0.05, 0.05] under a failure band |theta| > 0.2:
  // the region straddles the boundary, so its abstract start is failing and the
  // bound is 1. Splitting peels off [0.1, 0.2], which the stabilizing policy
  // keeps inside the band, so that half drops to bound 0.
  mosaic::PendulumParams p;
  p.theta_fail = 0.2;
  const Environment env =
      Environment::pendulum(p, Box({Interval(0.1, 0.3), Interval(-0.05, 0.05)}));
  const Network net = stabilizing_net();
  const FaultModel fault = FaultModel::fault_free(2);
  BuildOptions build;
  build.horizon = 2;
  build.eps = 0.02;
  RefineOptions opt;
  opt.p_safe = 0.2;
  opt.max_rounds = 1;

  const auto input =
      classify_cells(net, env, fault, {env.init_region()}, build, opt.p_safe);
  REQUIRE(input.at(0).upper_bound == 1.0);
  REQUIRE(input.at(0).verdict == RegionVerdict::unsafe);

  const auto output = mosaic::refine(net, env, fault, input, build, opt);
  REQUIRE(output.size() == 2);
  CHECK(total_volume(output) == Catch::Approx(total_volume(input)).epsilon(1e-9));
  for (const RegionResult& r : output) {
    CHECK(r.generation == 1);
    CHECK(r.upper_bound <= input[0].upper_bound);
  }
  CHECK(output[0].box[0].hi == Catch::Approx(0.2));
  CHECK(output[0].upper_bound == 0.0);
  CHECK(output[0].verdict == RegionVerdict::safe);
  CHECK(output[1].upper_bound == 1.0);
}

TEST_CASE("regions below the precision floor stop splitting", "[refinement]") {
  mosaic::PendulumParams p;
  p.theta_fail = 0.2;
  const Environment env =
      Environment::pendulum(p, Box({Interval(0.15, 0.3), Interval(-0.05, 0.05)}));
  const Network net = stabilizing_net();
  const FaultModel fault = FaultModel::fault_free(2);
  BuildOptions build;
  build.horizon = 1;
  build.eps = 0.2;  // one split puts every child width below this
  RefineOptions opt;
  opt.p_safe = 0.2;
  opt.max_rounds = 8;

  const auto input =
      classify_cells(net, env, fault, {env.init_region()}, build, opt.p_safe);
  const auto output = mosaic::refine(net, env, fault, input, build, opt);
  for (const RegionResult& r : output) {
    CHECK(r.generation <= 1);
    CHECK(r.verdict != RegionVerdict::unsafe);
    if (r.verdict == RegionVerdict::precision_limited) CHECK(r.box.max_width() < build.eps);
  }
}

TEST_CASE("refinement conserves volume and never worsens a lineage", "[refinement]") {
  mosaic::PendulumParams p;
  p.theta_fail = 0.3;
  const Environment env = Environment::pendulum(p, Environment::pendulum().init_region());
  const Network net = constant_net2(0);  // always negative torque, drives theta down
  const FaultModel fault = FaultModel::sticky(0.2, 2);
  BuildOptions build;
  build.horizon = 3;
  build.eps = 0.35 / 8.0;
  RefineOptions opt;
  opt.p_safe = 0.5;

  mosaic::ActionRegionCache cache(2, 2);
  const auto cells = mosaic::initial_grid(env, {0.35, 0.5});
  const auto input = classify_cells(net, env, fault, cells, build, opt.p_safe, &cache);

  double previous_safe = safe_volume(input, opt.p_safe);
  std::vector<RegionResult> current = input;
  for (int rounds = 1; rounds <= 3; ++rounds) {
    RefineOptions step = opt;
    step.max_rounds = 1;
    current = mosaic::refine(net, env, fault, current, build, step, &cache);
    CHECK(total_volume(current) == Catch::Approx(total_volume(input)).epsilon(1e-9));
    const double now_safe = safe_volume(current, opt.p_safe);
    CHECK(now_safe >= previous_safe - 1e-12);
    previous_safe = now_safe;
    for (const RegionResult& r : current) {
      CHECK(r.upper_bound >= 0.0);
      CHECK(r.upper_bound <= 1.0);
      CHECK(r.generation <= rounds);
    }
  }

  // Children carry min(child, parent): re-solving any output region from
  // scratch can only give a bound at least as large as the reported one.
  for (const RegionResult& r : current) {
    if (r.generation == 0) continue;
    const double fresh = mosaic::region_bound(net, env, fault, r.box, build, &cache);
    CHECK(r.upper_bound <= fresh + 1e-12);
  }
}

TEST_CASE("refined bounds stay sound for sampled concrete starts", "[refinement]") {
  mosaic::PendulumParams p;
  p.theta_fail = 0.3;
  const Environment env = Environment::pendulum(p, Environment::pendulum().init_region());
  const Network net = constant_net2(0);
  const FaultModel fault = FaultModel::sticky(0.2, 2);
  BuildOptions build;
  build.horizon = 3;
  build.eps = 0.35 / 8.0;
  RefineOptions opt;
  opt.p_safe = 0.5;
  opt.max_rounds = 2;

  mosaic::ActionRegionCache cache(2, 2);
  const auto cells = mosaic::initial_grid(env, {0.35, 0.5});
  const auto input = classify_cells(net, env, fault, cells, build, opt.p_safe, &cache);
  const auto output = mosaic::refine(net, env, fault, input, build, opt, &cache);

  std::mt19937 rng(41);
  for (const RegionResult& r : output) {
    for (int t = 0; t < 10; ++t) {
      const Point x = random_point_in(rng, r.box);
      const double exact = mosaic::concrete_reach(net, env, fault, x, build.horizon);
      CHECK(exact <= r.upper_bound + 1e-9);
    }
  }
}
