#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "mosaic/box.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/network.hpp"
#include "mosaic/parallel.hpp"
#include "mosaic/rtree.hpp"

namespace mosaic {

enum class BoundMethod { interval, planet };

struct ActionPartition {
  std::vector<Box> sat;        // policy takes `action` everywhere
  std::vector<Box> unsat;      // policy never takes `action`
  std::vector<Box> undecided;  // below precision, status open
  std::size_t action = 0;
  double epsilon = 0.0;
};

// Freshly proven sat/unsat regions per action, recorded during extraction
// runs that read a shared cache, to be applied by the single writer later.
struct ActionCommitBatch {
  std::vector<std::vector<Box>> sat;
  std::vector<std::vector<Box>> unsat;

  explicit ActionCommitBatch(std::size_t action_count = 0)
      : sat(action_count), unsat(action_count) {}

  void merge(ActionCommitBatch&& other) {
    if (sat.size() < other.sat.size()) {
      sat.resize(other.sat.size());
      unsat.resize(other.unsat.size());
    }
    for (std::size_t a = 0; a < other.sat.size(); ++a) {
      for (Box& b : other.sat[a]) sat[a].push_back(std::move(b));
      for (Box& b : other.unsat[a]) unsat[a].push_back(std::move(b));
    }
  }
};

// Per-action store of definitively classified regions, shared across
// branch-and-bound calls so overlapping queries only refine fresh area.
// Entries for one action never overlap: commits insert only the fragments
// not already covered, which also absorbs duplicates produced by concurrent
// reads of a stale snapshot. Single writer; reads must not race commits.
class ActionRegionCache {
 public:
  ActionRegionCache(std::size_t dim, std::size_t action_count) {
    trees_.reserve(action_count);
    for (std::size_t a = 0; a < action_count; ++a) trees_.emplace_back(dim);
  }

  std::size_t action_count() const { return trees_.size(); }
  const RTree<bool>& tree(std::size_t action) const { return trees_.at(action); }

  void commit(std::size_t action, const std::vector<Box>& sat, const std::vector<Box>& unsat) {
    RTree<bool>& t = trees_.at(action);
    for (const Box& b : sat)
      for (Box& frag : t.coverage_gaps(b)) t.insert(frag, true);
    for (const Box& b : unsat)
      for (Box& frag : t.coverage_gaps(b)) t.insert(frag, false);
  }

  void apply(const ActionCommitBatch& batch) {
    for (std::size_t a = 0; a < batch.sat.size() && a < trees_.size(); ++a)
      commit(a, batch.sat[a], batch.unsat[a]);
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& t : trees_) n += t.size();
    return n;
  }

 private:
  std::vector<RTree<bool>> trees_;
};

namespace detail {

enum class BabVerdict : std::uint8_t { sat, unsat, split, at_precision };

inline BabVerdict classify(const Network& action_net, const Box& b, double eps,
                           BoundMethod method) {
  const OutputBounds fast = bounds_interval(action_net, b);
  double lb = fast.lb[0];
  double ub = fast.ub[0];
  if (!(ub < 0.0) && !(lb > 0.0) && method == BoundMethod::planet) {
    const OutputBounds tight = bounds_planet(action_net, b);
    lb = tight.lb[0];
    ub = tight.ub[0];
  }
  if (ub < 0.0) return BabVerdict::sat;
  if (lb > 0.0) return BabVerdict::unsat;
  return b.max_width() < eps ? BabVerdict::at_precision : BabVerdict::split;
}

// True when the intersection piece collapsed onto a face of scope (zero
// width in a dimension scope itself extends through).
inline bool face_sliver(const Box& piece, const Box& scope) {
  for (std::size_t d = 0; d < piece.size(); ++d)
    if (piece[d].degenerate() && !scope[d].degenerate()) return true;
  return false;
}

}  // namespace detail

// Branch-and-bound partition of b into regions where the policy certainly
// takes action a (the appended action layer stays negative), certainly does
// not (stays positive), or remained open at precision eps. The worklist is
// FIFO; each level is bounded in parallel and committed in index order.
// Cached definitive regions are reused so only uncovered gaps are explored;
// newly proven regions are recorded in `commits` when given.
inline ActionPartition find_action_subregions(const Network& net, std::size_t a, const Box& b,
                                              double eps,
                                              BoundMethod method = BoundMethod::planet,
                                              const ActionRegionCache* cache = nullptr,
                                              ActionCommitBatch* commits = nullptr) {
  if (!(eps > 0.0))
    fail(errc::bad_precision, "extraction",
         "precision must be positive, got " + std::to_string(eps));
  if (b.size() != net.input_dim())
    fail(errc::dim_mismatch, "extraction",
         "box dimension " + std::to_string(b.size()) + " does not match network input " +
             std::to_string(net.input_dim()));
  const Network action_net = add_action_layer(net, a);

  ActionPartition out;
  out.action = a;
  out.epsilon = eps;

  // Whole-box fast path. Most queries sit fully on one side of the decision
  // boundary; answering them in one bound evaluation keeps fragments already
  // in the cache from propagating their cuts into boxes that never needed
  // splitting, which would otherwise compound across build depths. Results
  // this cheap are not committed: re-deriving them later costs the same one
  // evaluation, while storing them would bloat the cache with large boxes
  // whose subtraction against later commits dominates the build.
  switch (detail::classify(action_net, b, eps, method)) {
    case detail::BabVerdict::sat:
      out.sat.push_back(b);
      return out;
    case detail::BabVerdict::unsat:
      out.unsat.push_back(b);
      return out;
    case detail::BabVerdict::at_precision:
      out.undecided.push_back(b);
      return out;
    case detail::BabVerdict::split:
      break;
  }

  std::vector<Box> level;
  if (cache) {
    const RTree<bool>& t = cache->tree(a);
    for (const auto& e : t.window_query(b)) {
      Box piece = b.intersection(e.box);
      if (detail::face_sliver(piece, b)) continue;
      (e.value ? out.sat : out.unsat).push_back(std::move(piece));
    }
    level = t.coverage_gaps(b);
  } else {
    level = {b};
  }

  std::vector<Box> fresh_sat, fresh_unsat;
  while (!level.empty()) {
    std::vector<detail::BabVerdict> verdicts(level.size());
    parallel_for(level.size(), [&](std::size_t i) {
      verdicts[i] = detail::classify(action_net, level[i], eps, method);
    });
    std::vector<Box> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      switch (verdicts[i]) {
        case detail::BabVerdict::sat:
          fresh_sat.push_back(std::move(level[i]));
          break;
        case detail::BabVerdict::unsat:
          fresh_unsat.push_back(std::move(level[i]));
          break;
        case detail::BabVerdict::at_precision:
          out.undecided.push_back(std::move(level[i]));
          break;
        case detail::BabVerdict::split: {
          auto [lo, hi] = level[i].split();
          next.push_back(std::move(lo));
          next.push_back(std::move(hi));
          break;
        }
      }
    }
    level = std::move(next);
  }

  if (commits) {
    if (commits->sat.size() <= a) {
      commits->sat.resize(a + 1);
      commits->unsat.resize(a + 1);
    }
    for (const Box& bx : fresh_sat) commits->sat[a].push_back(bx);
    for (const Box& bx : fresh_unsat) commits->unsat[a].push_back(bx);
  }
  for (Box& bx : fresh_sat) out.sat.push_back(std::move(bx));
  for (Box& bx : fresh_unsat) out.unsat.push_back(std::move(bx));
  return out;
}

// Convenience for serial callers: reads the cache and commits straight back.
inline ActionPartition find_action_subregions(const Network& net, std::size_t a, const Box& b,
                                              double eps, BoundMethod method,
                                              ActionRegionCache& cache) {
  ActionCommitBatch batch(cache.action_count());
  ActionPartition part = find_action_subregions(net, a, b, eps, method, &cache, &batch);
  cache.apply(batch);
  return part;
}

struct ConsistentPiece {
  Box box;
  std::vector<std::size_t> actions;  // candidate actions, ascending; singleton when decided
};

// Partition of b into pieces whose candidate action-sets are consistent with
// the policy: a singleton where some action was proven taken (or all rivals
// proven not taken), the set of still-open actions elsewhere. Pieces are
// interior-disjoint and cover b.
inline std::vector<ConsistentPiece> partition_consistent(
    const Network& net, const Box& b, double eps, BoundMethod method = BoundMethod::planet,
    const ActionRegionCache* cache = nullptr, ActionCommitBatch* commits = nullptr) {
  const std::size_t m = net.output_dim();
  struct Working {
    Box box;
    std::vector<std::size_t> candidates;
    bool decided;
  };
  std::vector<Working> pieces;
  std::vector<std::size_t> all(m);
  for (std::size_t a = 0; a < m; ++a) all[a] = a;
  pieces.push_back(Working{b, all, m == 1});

  for (std::size_t a = 0; a < m; ++a) {
    bool any_open = false;
    for (const Working& p : pieces)
      if (!p.decided) {
        any_open = true;
        break;
      }
    if (!any_open) break;
    const ActionPartition part = find_action_subregions(net, a, b, eps, method, cache, commits);
    // 0 = unsat, 1 = sat, 2 = undecided
    RTree<int> tree(b.size());
    for (const Box& bx : part.unsat) tree.insert(bx, 0);
    for (const Box& bx : part.sat) tree.insert(bx, 1);
    for (const Box& bx : part.undecided) tree.insert(bx, 2);

    std::vector<Working> next;
    for (Working& p : pieces) {
      if (p.decided) {
        next.push_back(std::move(p));
        continue;
      }
      for (const auto& e : tree.window_query(p.box)) {
        Box piece = p.box.intersection(e.box);
        if (detail::face_sliver(piece, p.box)) continue;
        Working w;
        w.box = std::move(piece);
        if (e.value == 1) {
          w.candidates = {a};
          w.decided = true;
        } else if (e.value == 0) {
          w.candidates = p.candidates;
          w.candidates.erase(std::remove(w.candidates.begin(), w.candidates.end(), a),
                             w.candidates.end());
          if (w.candidates.empty())
            fail(errc::domain, "extraction",
                 "sound bounds ruled out every action on a region; inconsistent bounds");
          w.decided = w.candidates.size() == 1;
        } else {
          w.candidates = p.candidates;
          w.decided = false;
        }
        next.push_back(std::move(w));
      }
    }
    pieces = std::move(next);
  }

  std::vector<ConsistentPiece> out;
  out.reserve(pieces.size());
  for (Working& p : pieces)
    out.push_back(ConsistentPiece{std::move(p.box), std::move(p.candidates)});
  return out;
}

inline std::vector<ConsistentPiece> partition_consistent(const Network& net, const Box& b,
                                                         double eps, BoundMethod method,
                                                         ActionRegionCache& cache) {
  ActionCommitBatch batch(cache.action_count());
  auto pieces = partition_consistent(net, b, eps, method, &cache, &batch);
  cache.apply(batch);
  return pieces;
}

}  // namespace mosaic
