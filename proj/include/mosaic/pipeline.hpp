#pragma once

#include <chrono>
#include <fstream>
#include <string>
#include <vector>

#include "mosaic/abstraction.hpp"
#include "mosaic/config.hpp"
#include "mosaic/model_check.hpp"
#include "mosaic/refinement.hpp"
#include "mosaic/results.hpp"

namespace mosaic {

// Wall-clock numbers and scale counters for the run report. Nothing here
// feeds back into the verification outputs, which stay deterministic.
struct RunReport {
  std::size_t initial_regions = 0;
  std::size_t states = 0;
  std::size_t choices = 0;
  std::size_t transitions = 0;
  std::size_t cache_regions = 0;
  int rounds_requested = 0;
  double build_seconds = 0.0;
  double check_seconds = 0.0;
  double refine_seconds = 0.0;
  std::size_t max_states = 0;
};

struct RunOutcome {
  std::vector<RegionResult> results;
  RunReport report;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Full pipeline: grid the initial region, build the abstraction, solve for
// max failure probability per initial cell, then refine unsafe cells.
inline RunOutcome run_verification(const RunConfig& cfg) {
  RunOutcome out;
  out.report.rounds_requested = cfg.refine.max_rounds;
  out.report.max_states = cfg.build.max_states;

  std::vector<Box> cells = cfg.grid_widths.empty()
                               ? std::vector<Box>{cfg.env.init_region()}
                               : initial_grid(cfg.env, cfg.grid_widths);
  out.report.initial_regions = cells.size();

  ActionRegionCache cache(cfg.env.state_dim(), cfg.env.action_count());

  auto t0 = std::chrono::steady_clock::now();
  const AbstractMdp mdp = build_mdp(cfg.net, cfg.env, cfg.fault, cells, cfg.build, &cache);
  out.report.build_seconds = detail::seconds_since(t0);
  out.report.states = mdp.state_count();
  out.report.choices = mdp.choice_count();
  out.report.transitions = mdp.transition_count();

  t0 = std::chrono::steady_clock::now();
  const std::vector<double> value = max_reach(mdp, cfg.build.horizon);
  out.report.check_seconds = detail::seconds_since(t0);

  // Initial ids follow cell order: build_mdp adds them first, deduplicated.
  out.results.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::size_t sid = mdp.find_state(cells[i], false, 0);
    if (sid == AbstractMdp::npos) sid = mdp.find_state(cells[i], true, 0);
    if (sid == AbstractMdp::npos)
      fail(errc::domain, "pipeline", "initial cell lost during construction");
    RegionResult r;
    r.box = cells[i];
    r.upper_bound = value.at(sid);
    r.generation = 0;
    r.verdict = classify_region(r.upper_bound, r.box.max_width(), cfg.refine.p_safe,
                                cfg.build.eps);
    out.results.push_back(std::move(r));
  }

  if (cfg.refine.max_rounds > 0) {
    t0 = std::chrono::steady_clock::now();
    out.results = refine(cfg.net, cfg.env, cfg.fault, std::move(out.results), cfg.build,
                         cfg.refine, &cache);
    out.report.refine_seconds = detail::seconds_since(t0);
  }
  out.report.cache_regions = cache.size();
  return out;
}

inline void write_report(const RunReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "pipeline", "cannot open '" + path + "' for writing");
  out << "initial_regions: " << r.initial_regions << "\n"
      << "states: " << r.states << "\n"
      << "choices: " << r.choices << "\n"
      << "transitions: " << r.transitions << "\n"
      << "cache_regions: " << r.cache_regions << "\n"
      << "max_states_cap: " << r.max_states << "\n"
      << "refinement_rounds_requested: " << r.rounds_requested << "\n"
      << "build_seconds: " << r.build_seconds << "\n"
      << "check_seconds: " << r.check_seconds << "\n"
      << "refine_seconds: " << r.refine_seconds << "\n";
}

}  // namespace mosaic
