#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "mosaic/box.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

// R*-tree over runtime-dimensional boxes. Fan-out 8, min fill 40%, forced
// reinsert of 30% of a node on its first overflow per level per insertion.
// Single writer, concurrent readers: do not interleave insert with queries.
template <typename T>
class RTree {
 public:
  struct Entry {
    Box box;
    T value;
    std::size_t id;
  };

  explicit RTree(std::size_t dim) : dim_(dim) {}

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Returns a unique, stable id (insertion order).
  std::size_t insert(const Box& key, T value) {
    check_dim(key);
    const std::size_t id = data_.size();
    data_.push_back(Entry{key, std::move(value), id});
    auto item = std::make_unique<Node>();
    item->mbr = key;
    item->entry = id;
    if (!root_) {
      root_ = std::make_unique<Node>();
      root_->entry = kNoEntry;
      root_->mbr = key;
      root_->kids.push_back(std::move(item));
      root_level_ = 1;
      return id;
    }
    reinserted_levels_.assign(static_cast<std::size_t>(root_level_) + 1, false);
    insert_item(std::move(item), 1);
    while (!pending_.empty()) {
      Pending p = std::move(pending_.back());
      pending_.pop_back();
      insert_item(std::move(p.node), p.level);
    }
    return id;
  }

  // Calls visit(entry) for every stored entry whose box intersects window.
  template <typename F>
  void visit_window(const Box& window, F&& visit) const {
    check_dim(window);
    if (root_) visit_rec(*root_, window, visit);
  }

  std::vector<Entry> window_query(const Box& window) const {
    std::vector<Entry> out;
    visit_window(window, [&](const Entry& e) { out.push_back(e); });
    std::sort(out.begin(), out.end(),
              [](const Entry& a, const Entry& b) { return a.id < b.id; });
    return out;
  }

  // Pairwise interior-disjoint boxes covering window minus the union of all
  // stored boxes. Empty when window is fully covered.
  std::vector<Box> coverage_gaps(const Box& window) const {
    check_dim(window);
    std::vector<Box> frags{window};
    if (root_) subtract_rec(*root_, frags);
    return frags;
  }

  template <typename F>
  void for_each(F&& fn) const {
    for (const Entry& e : data_) fn(e);
  }

  const Entry& entry(std::size_t id) const { return data_.at(id); }

  // Nodes touched by a window query; for performance diagnostics only.
  std::size_t count_query_nodes(const Box& window) const {
    check_dim(window);
    std::size_t nodes = 0;
    if (root_) count_rec(*root_, window, nodes);
    return nodes;
  }

 private:
  static constexpr std::size_t kMaxFill = 8;
  static constexpr std::size_t kMinFill = 3;   // 40% of fan-out
  static constexpr std::size_t kReinsert = 2;  // 30% of fan-out
  static constexpr std::size_t kNoEntry = std::numeric_limits<std::size_t>::max();

  // A node either references one stored entry (entry != kNoEntry, kids empty)
  // or is an inner/leaf node whose kids all sit one level below it. Stored
  // entries sit at level 0, leaves at level 1, the root at root_level_.
  struct Node {
    Box mbr;
    std::size_t entry = kNoEntry;
    std::vector<std::unique_ptr<Node>> kids;
    bool holds_entry() const { return entry != kNoEntry; }
  };

  struct Pending {
    std::unique_ptr<Node> node;
    int level;
  };

  void check_dim(const Box& b) const {
    if (b.size() != dim_)
      fail(errc::dim_mismatch, "spatial",
           "box dimension " + std::to_string(b.size()) + " does not match index dimension " +
               std::to_string(dim_));
  }

  static double enlargement(const Box& mbr, const Box& add) {
    double grown = 1.0;
    for (std::size_t i = 0; i < mbr.size(); ++i)
      grown *= hull(mbr[i], add[i]).width();
    return grown - mbr.volume();
  }

  static double overlap_volume(const Box& a, const Box& b) {
    double v = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double w = std::min(a[i].hi, b[i].hi) - std::max(a[i].lo, b[i].lo);
      if (w <= 0.0) return 0.0;
      v *= w;
    }
    return v;
  }

  static double margin(const Box& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += b[i].width();
    return s;
  }

  static Box mbr_of(const std::vector<std::unique_ptr<Node>>& kids, std::size_t begin,
                    std::size_t end) {
    Box b = kids[begin]->mbr;
    for (std::size_t i = begin + 1; i < end; ++i)
      for (std::size_t d = 0; d < b.size(); ++d) b[d] = hull(b[d], kids[i]->mbr[d]);
    return b;
  }

  static void refit(Node& n) { n.mbr = mbr_of(n.kids, 0, n.kids.size()); }

  static void grow(Node& n, const Box& add) {
    for (std::size_t d = 0; d < add.size(); ++d) n.mbr[d] = hull(n.mbr[d], add[d]);
  }

  // Root-level entry point: descends to target_level, splitting the root if
  // the recursion reports an overflow split.
  void insert_item(std::unique_ptr<Node> item, int level) {
    std::unique_ptr<Node> sibling = insert_rec(*root_, std::move(item), root_level_, level);
    if (sibling) {
      auto old_root = std::move(root_);
      root_ = std::make_unique<Node>();
      root_->entry = kNoEntry;
      root_->kids.push_back(std::move(old_root));
      root_->kids.push_back(std::move(sibling));
      refit(*root_);
      ++root_level_;
      reinserted_levels_.resize(static_cast<std::size_t>(root_level_) + 1, false);
    }
  }

  std::unique_ptr<Node> insert_rec(Node& n, std::unique_ptr<Node> item, int n_level,
                                   int target_level) {
    grow(n, item->mbr);
    if (n_level == target_level) {
      n.kids.push_back(std::move(item));
      return overflow(n, n_level);
    }
    const std::size_t c = choose_subtree(n, item->mbr, n_level);
    std::unique_ptr<Node> split_kid =
        insert_rec(*n.kids[c], std::move(item), n_level - 1, target_level);
    if (!split_kid) return nullptr;
    n.kids.push_back(std::move(split_kid));
    grow(n, n.kids.back()->mbr);
    return overflow(n, n_level);
  }

  // Minimum overlap enlargement when choosing among leaves, minimum volume
  // enlargement otherwise; ties fall through to volume enlargement, volume,
  // then lowest index.
  std::size_t choose_subtree(const Node& n, const Box& add, int n_level) const {
    const bool kids_are_leaves = (n_level - 1 == 1);
    std::size_t best = 0;
    double best_overlap = 0.0, best_enl = 0.0, best_vol = 0.0;
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
      const Box& mbr = n.kids[i]->mbr;
      double d_overlap = 0.0;
      if (kids_are_leaves) {
        Box grown = mbr;
        for (std::size_t d = 0; d < grown.size(); ++d) grown[d] = hull(grown[d], add[d]);
        for (std::size_t j = 0; j < n.kids.size(); ++j) {
          if (j == i) continue;
          d_overlap += overlap_volume(grown, n.kids[j]->mbr) -
                       overlap_volume(mbr, n.kids[j]->mbr);
        }
      }
      const double enl = enlargement(mbr, add);
      const double vol = mbr.volume();
      const bool better = i == 0 || d_overlap < best_overlap ||
                          (d_overlap == best_overlap &&
                           (enl < best_enl || (enl == best_enl && vol < best_vol)));
      if (better) {
        best = i;
        best_overlap = d_overlap;
        best_enl = enl;
        best_vol = vol;
      }
    }
    return best;
  }

  std::unique_ptr<Node> overflow(Node& n, int level) {
    if (n.kids.size() <= kMaxFill) return nullptr;
    if (level != root_level_ && !reinserted_levels_[static_cast<std::size_t>(level)]) {
      reinserted_levels_[static_cast<std::size_t>(level)] = true;
      reinsert(n, level);
      return nullptr;
    }
    return split(n);
  }

  // Defers the kReinsert kids farthest from the node's center to pending_,
  // closest-first, so the main descent never mutates its own path.
  void reinsert(Node& n, int level) {
    const Point c = n.mbr.center();
    std::vector<std::pair<double, std::size_t>> by_dist;
    by_dist.reserve(n.kids.size());
    for (std::size_t i = 0; i < n.kids.size(); ++i) {
      const Point kc = n.kids[i]->mbr.center();
      double d2 = 0.0;
      for (std::size_t d = 0; d < c.size(); ++d) d2 += (kc[d] - c[d]) * (kc[d] - c[d]);
      by_dist.emplace_back(d2, i);
    }
    std::stable_sort(by_dist.begin(), by_dist.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::size_t> victims;
    for (std::size_t i = 0; i < kReinsert; ++i) victims.push_back(by_dist[i].second);
    std::sort(victims.begin(), victims.end(), std::greater<>());
    std::vector<std::unique_ptr<Node>> removed;
    for (std::size_t v : victims) {
      removed.push_back(std::move(n.kids[v]));
      n.kids.erase(n.kids.begin() + static_cast<std::ptrdiff_t>(v));
    }
    refit(n);
    // pending_ is a stack; push farthest-first so the closest reinserts first.
    for (auto& node : removed) pending_.push_back(Pending{std::move(node), level});
  }

  // R* split: choose the axis with minimal summed margin over all candidate
  // distributions, then the distribution with minimal overlap (tie: volume).
  std::unique_ptr<Node> split(Node& n) {
    auto& kids = n.kids;
    const std::size_t total = kids.size();
    std::size_t best_axis = 0;
    bool best_by_hi = false;
    std::size_t best_k = kMinFill;
    double best_margin_sum = 0.0;
    for (std::size_t axis = 0; axis < dim_; ++axis) {
      double margin_sum = 0.0;
      double axis_best_overlap = 0.0, axis_best_vol = 0.0;
      bool axis_best_by_hi = false;
      std::size_t axis_best_k = kMinFill;
      bool axis_first = true;
      for (int by_hi = 0; by_hi <= 1; ++by_hi) {
        sort_kids(kids, axis, by_hi != 0);
        for (std::size_t k = kMinFill; k + kMinFill <= total; ++k) {
          const Box left = mbr_of(kids, 0, k);
          const Box right = mbr_of(kids, k, total);
          margin_sum += margin(left) + margin(right);
          const double ov = overlap_volume(left, right);
          const double vol = left.volume() + right.volume();
          if (axis_first || ov < axis_best_overlap ||
              (ov == axis_best_overlap && vol < axis_best_vol)) {
            axis_first = false;
            axis_best_overlap = ov;
            axis_best_vol = vol;
            axis_best_by_hi = by_hi != 0;
            axis_best_k = k;
          }
        }
      }
      if (axis == 0 || margin_sum < best_margin_sum) {
        best_margin_sum = margin_sum;
        best_axis = axis;
        best_by_hi = axis_best_by_hi;
        best_k = axis_best_k;
      }
    }
    sort_kids(kids, best_axis, best_by_hi);
    auto sibling = std::make_unique<Node>();
    sibling->entry = kNoEntry;
    sibling->kids.assign(std::make_move_iterator(kids.begin() + static_cast<std::ptrdiff_t>(best_k)),
                         std::make_move_iterator(kids.end()));
    kids.resize(best_k);
    refit(n);
    refit(*sibling);
    return sibling;
  }

  static void sort_kids(std::vector<std::unique_ptr<Node>>& kids, std::size_t axis, bool by_hi) {
    std::stable_sort(kids.begin(), kids.end(), [&](const auto& a, const auto& b) {
      const Interval& ia = a->mbr[axis];
      const Interval& ib = b->mbr[axis];
      if (by_hi) return ia.hi != ib.hi ? ia.hi < ib.hi : ia.lo < ib.lo;
      return ia.lo != ib.lo ? ia.lo < ib.lo : ia.hi < ib.hi;
    });
  }

  template <typename F>
  void visit_rec(const Node& n, const Box& window, F& visit) const {
    if (!n.mbr.intersects(window)) return;
    if (n.holds_entry()) {
      visit(data_[n.entry]);
      return;
    }
    for (const auto& kid : n.kids) visit_rec(*kid, window, visit);
  }

  void count_rec(const Node& n, const Box& window, std::size_t& nodes) const {
    ++nodes;
    if (!n.mbr.intersects(window) || n.holds_entry()) return;
    for (const auto& kid : n.kids) count_rec(*kid, window, nodes);
  }

  void subtract_rec(const Node& n, std::vector<Box>& frags) const {
    if (frags.empty()) return;
    bool touches = false;
    for (const Box& f : frags)
      if (f.intersects(n.mbr)) {
        touches = true;
        break;
      }
    if (!touches) return;
    if (n.holds_entry()) {
      std::vector<Box> next;
      for (const Box& f : frags) {
        if (!f.intersects(n.mbr)) {
          next.push_back(f);
          continue;
        }
        for (Box& piece : subtract(f, n.mbr)) next.push_back(std::move(piece));
      }
      frags = std::move(next);
      return;
    }
    for (const auto& kid : n.kids) subtract_rec(*kid, frags);
  }

  std::size_t dim_;
  std::unique_ptr<Node> root_;
  int root_level_ = 0;
  std::vector<Entry> data_;
  std::vector<bool> reinserted_levels_;
  std::vector<Pending> pending_;
};

}  // namespace mosaic
