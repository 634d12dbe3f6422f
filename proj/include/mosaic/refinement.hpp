#pragma once

#include <algorithm>
#include <vector>

#include "mosaic/abstraction.hpp"
#include "mosaic/model_check.hpp"
#include "mosaic/results.hpp"

namespace mosaic {

struct RefineOptions {
  double p_safe = 0.2;
  int max_rounds = 50;
};

// Bound for a single initial box: rebuild its branch to the horizon and
// solve. The shared cache carries classified action regions across rebuilds.
inline double region_bound(const Network& net, const Environment& env, const FaultModel& fault,
                           const Box& region, const BuildOptions& opt,
                           ActionRegionCache* cache) {
  const AbstractMdp mdp = build_mdp(net, env, fault, {region}, opt, cache);
  const std::vector<double> value = max_reach(mdp, opt.horizon);
  return value.at(mdp.initial().at(0));
}

// One refinement pass over the initial regions: every still-splittable
// unsafe region (largest volume first) is halved, each half's branch is
// rebuilt from scratch and re-solved, and the child's reported bound is
// min(child bound, parent bound) — the parent bound stays valid for every
// state inside the child, so reported bounds never increase down a lineage.
// Rounds stop when none are unsafe or max_rounds is reached; unsafe regions
// below the precision are reported precision_limited instead of split.
inline std::vector<RegionResult> refine(const Network& net, const Environment& env,
                                        const FaultModel& fault,
                                        std::vector<RegionResult> results,
                                        const BuildOptions& build, const RefineOptions& opt,
                                        ActionRegionCache* cache = nullptr) {
  for (int round = 0; round < opt.max_rounds; ++round) {
    std::vector<std::size_t> unsafe;
    for (std::size_t i = 0; i < results.size(); ++i)
      if (results[i].verdict == RegionVerdict::unsafe) unsafe.push_back(i);
    if (unsafe.empty()) break;
    std::stable_sort(unsafe.begin(), unsafe.end(), [&](std::size_t a, std::size_t b) {
      return results[a].box.volume() > results[b].box.volume();
    });
    // Children of region i replace it in place; splits of this round are
    // staged so the replacement indices stay valid.
    std::vector<std::vector<RegionResult>> replacements(results.size());
    for (std::size_t idx : unsafe) {
      const RegionResult& parent = results[idx];
      auto [lo, hi] = parent.box.split();
      std::vector<RegionResult> kids;
      for (Box* half : {&lo, &hi}) {
        RegionResult child;
        child.box = *half;
        const double computed = region_bound(net, env, fault, child.box, build, cache);
        child.upper_bound = std::min(computed, parent.upper_bound);
        child.generation = parent.generation + 1;
        child.verdict = classify_region(child.upper_bound, child.box.max_width(), opt.p_safe,
                                        build.eps);
        kids.push_back(std::move(child));
      }
      replacements[idx] = std::move(kids);
    }
    std::vector<RegionResult> next;
    next.reserve(results.size() + unsafe.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (replacements[i].empty()) {
        next.push_back(std::move(results[i]));
        continue;
      }
      for (RegionResult& child : replacements[i]) next.push_back(std::move(child));
    }
    results = std::move(next);
  }
  return results;
}

}  // namespace mosaic
