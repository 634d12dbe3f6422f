#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mosaic/box.hpp"
#include "mosaic/environment.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/extraction.hpp"
#include "mosaic/faults.hpp"
#include "mosaic/mdp.hpp"
#include "mosaic/network.hpp"
#include "mosaic/parallel.hpp"

namespace mosaic {

struct BuildOptions {
  int horizon = 5;
  double eps = 1.0 / 64.0;
  std::size_t max_states = 500000;  // hard cap; exceeding aborts the build
  BoundMethod method = BoundMethod::planet;
};

// Axis-aligned tiling of the environment's initial region; trailing cells
// are truncated to fit. Cells are emitted in lexicographic index order with
// the last dimension fastest.
inline std::vector<Box> initial_grid(const Environment& env,
                                     const std::vector<double>& cell_widths) {
  const Box& region = env.init_region();
  if (cell_widths.size() != region.size())
    fail(errc::dim_mismatch, "abstraction",
         "grid widths cover " + std::to_string(cell_widths.size()) + " dimensions, region has " +
             std::to_string(region.size()));
  for (double w : cell_widths)
    if (!(w > 0.0))
      fail(errc::bad_precision, "abstraction",
           "grid cell widths must be positive, got " + std::to_string(w));
  std::vector<std::vector<Interval>> segments(region.size());
  for (std::size_t d = 0; d < region.size(); ++d) {
    if (region[d].degenerate()) {
      segments[d].push_back(region[d]);
      continue;
    }
    double cur = region[d].lo;
    while (cur < region[d].hi) {
      const double next = std::min(cur + cell_widths[d], region[d].hi);
      segments[d].push_back(Interval(cur, next));
      cur = next;
    }
  }
  std::vector<Box> cells;
  std::vector<std::size_t> idx(region.size(), 0);
  for (;;) {
    std::vector<Interval> dims(region.size());
    for (std::size_t d = 0; d < region.size(); ++d) dims[d] = segments[d][idx[d]];
    cells.push_back(Box(std::move(dims)));
    std::size_t d = region.size();
    while (d > 0) {
      --d;
      if (++idx[d] < segments[d].size()) break;
      idx[d] = 0;
      if (d == 0) return cells;
    }
  }
}

namespace detail {

struct SuccessorSpec {
  double probability;
  Word word;
  Box box;
  bool fail;
};

struct ChoiceSpec {
  Box piece;
  std::vector<std::size_t> candidates;
  std::size_t action;
  std::vector<SuccessorSpec> successors;
};

struct FrontierExpansion {
  ActionCommitBatch commits;
  std::vector<ChoiceSpec> choices;
};

}  // namespace detail

// Builds the layered abstraction to the horizon: each frontier box is
// partitioned into policy-consistent pieces, every candidate action of a
// piece becomes one choice whose distribution follows the fault outcomes,
// and successors are the interval steps of the piece under each outcome
// word. Successors intersecting the failure set become absorbing fail
// states. Frontier states of a depth are expanded in parallel against a
// frozen cache snapshot; states, choices, and cache commits are applied
// serially in frontier order, so results do not depend on the worker count.
inline AbstractMdp build_mdp(const Network& net, const Environment& env, const FaultModel& fault,
                             const std::vector<Box>& init, const BuildOptions& opt,
                             ActionRegionCache* cache = nullptr) {
  if (init.empty()) fail(errc::no_initial_states, "abstraction", "no initial boxes given");
  if (opt.horizon < 1)
    fail(errc::domain, "abstraction",
         "horizon must be at least 1, got " + std::to_string(opt.horizon));
  if (!(opt.eps > 0.0))
    fail(errc::bad_precision, "abstraction",
         "precision must be positive, got " + std::to_string(opt.eps));
  if (net.input_dim() != env.state_dim())
    fail(errc::shape_mismatch, "abstraction",
         "network input width " + std::to_string(net.input_dim()) +
             " does not match state dimension " + std::to_string(env.state_dim()));
  if (net.output_dim() != env.action_count() || fault.action_count() != env.action_count())
    fail(errc::shape_mismatch, "abstraction",
         "network outputs, fault table, and environment must agree on the action count");

  AbstractMdp mdp(env.state_dim());
  std::vector<std::size_t> frontier;
  for (const Box& b : init) {
    const bool is_fail = env.box_fail_status(b) == BoxFailStatus::intersects_fail;
    const std::size_t before = mdp.state_count();
    const std::size_t id = mdp.add_state(b, is_fail, 0);
    mdp.add_initial(id);
    if (id == before && !is_fail) frontier.push_back(id);
  }
  if (mdp.state_count() > opt.max_states)
    fail(errc::memory_guard, "abstraction",
         "state cap " + std::to_string(opt.max_states) + " exceeded by the initial grid");

  for (int depth = 0; depth < opt.horizon && !frontier.empty(); ++depth) {
    std::vector<detail::FrontierExpansion> expansions(frontier.size());
    parallel_for(frontier.size(), [&](std::size_t i) {
      detail::FrontierExpansion& ex = expansions[i];
      ex.commits = ActionCommitBatch(env.action_count());
      const Box& box = mdp.state(frontier[i]).box;
      const auto pieces =
          partition_consistent(net, box, opt.eps, opt.method, cache, &ex.commits);
      for (const ConsistentPiece& piece : pieces) {
        for (std::size_t a : piece.actions) {
          detail::ChoiceSpec cs;
          cs.piece = piece.box;
          cs.candidates = piece.actions;
          cs.action = a;
          for (const Outcome& o : fault.outcomes(a)) {
            Box succ = env.abstract_step(piece.box, o.word);
            const bool is_fail = env.box_fail_status(succ) == BoxFailStatus::intersects_fail;
            cs.successors.push_back(
                detail::SuccessorSpec{o.probability, o.word, std::move(succ), is_fail});
          }
          ex.choices.push_back(std::move(cs));
        }
      }
    });

    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      detail::FrontierExpansion& ex = expansions[i];
      if (cache) cache->apply(ex.commits);
      for (detail::ChoiceSpec& cs : ex.choices) {
        Choice choice;
        choice.provenance = std::move(cs.piece);
        choice.action_set = std::move(cs.candidates);
        choice.action = cs.action;
        for (detail::SuccessorSpec& succ : cs.successors) {
          const std::size_t before = mdp.state_count();
          const std::size_t dst = mdp.add_state(succ.box, succ.fail, depth + 1);
          if (mdp.state_count() > opt.max_states)
            fail(errc::memory_guard, "abstraction",
                 "state cap " + std::to_string(opt.max_states) + " exceeded at depth " +
                     std::to_string(depth + 1));
          if (dst == before && !succ.fail && depth + 1 < opt.horizon) next.push_back(dst);
          choice.outcomes.push_back(WordOutcome{succ.probability, std::move(succ.word), dst});
          bool merged = false;
          for (auto& [p, d] : choice.dist)
            if (d == dst) {
              p += succ.probability;
              merged = true;
              break;
            }
          if (!merged) choice.dist.emplace_back(succ.probability, dst);
        }
        mdp.add_choice(frontier[i], std::move(choice));
      }
    }
    frontier = std::move(next);
  }
  return mdp;
}

}  // namespace mosaic
