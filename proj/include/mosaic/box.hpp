#pragma once

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <utility>
#include <vector>

#include "mosaic/errors.hpp"
#include "mosaic/interval.hpp"

namespace mosaic {

using Point = std::vector<double>;

// Closed axis-aligned box: one interval per dimension. Boxes sharing only a
// face are considered intersecting (measure-zero overlap is accepted).
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> dims) : dims_(std::move(dims)) {}
  Box(std::initializer_list<Interval> dims) : dims_(dims) {}

  std::size_t size() const { return dims_.size(); }
  const Interval& operator[](std::size_t i) const { return dims_[i]; }
  Interval& operator[](std::size_t i) { return dims_[i]; }
  const std::vector<Interval>& dims() const { return dims_; }

  bool operator==(const Box& o) const { return dims_ == o.dims_; }
  bool operator!=(const Box& o) const { return !(*this == o); }

  bool contains(const Point& p) const {
    check_dim(p.size(), "point");
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (!dims_[i].contains(p[i])) return false;
    return true;
  }

  bool contains(const Box& o) const {
    check_dim(o.size(), "box");
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (!dims_[i].contains(o.dims_[i])) return false;
    return true;
  }

  bool intersects(const Box& o) const {
    check_dim(o.size(), "box");
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (!dims_[i].intersects(o.dims_[i])) return false;
    return true;
  }

  // Precondition: intersects(o).
  Box intersection(const Box& o) const {
    check_dim(o.size(), "box");
    std::vector<Interval> out;
    out.reserve(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i)
      out.push_back(intersect(dims_[i], o.dims_[i]));
    return Box(std::move(out));
  }

  Point center() const {
    Point c(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) c[i] = dims_[i].mid();
    return c;
  }

  double volume() const {
    double v = 1.0;
    for (const Interval& d : dims_) v *= d.width();
    return v;
  }

  double max_width() const {
    double w = 0.0;
    for (const Interval& d : dims_) w = std::max(w, d.width());
    return w;
  }

  // Index of the widest dimension; ties break toward the lowest index.
  std::size_t widest_dim() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < dims_.size(); ++i)
      if (dims_[i].width() > dims_[best].width()) best = i;
    return best;
  }

  // Halve the widest dimension at its midpoint. The halves share the
  // splitting face, so their union is exactly this box.
  std::pair<Box, Box> split() const {
    if (dims_.empty()) fail(errc::cannot_split, "geometry", "cannot split a 0-dimensional box");
    const std::size_t d = widest_dim();
    const double m = dims_[d].mid();
    if (!(dims_[d].lo < m && m < dims_[d].hi))
      fail(errc::cannot_split, "geometry",
           "dimension " + std::to_string(d) + " has no representable midpoint");
    Box a = *this, b = *this;
    a.dims_[d] = Interval(dims_[d].lo, m);
    b.dims_[d] = Interval(m, dims_[d].hi);
    return {std::move(a), std::move(b)};
  }

 private:
  void check_dim(std::size_t n, const char* what) const {
    if (n != dims_.size())
      fail(errc::dim_mismatch, "geometry",
           std::string(what) + " has dimension " + std::to_string(n) + ", box has " +
               std::to_string(dims_.size()));
  }

  std::vector<Interval> dims_;
};

// Region of this \ other, as at most 2n disjoint-interior boxes. Dimensions
// are peeled one at a time: whatever lies outside other's slab in dimension i
// is emitted, and the remainder is narrowed before moving on.
inline std::vector<Box> subtract(const Box& a, const Box& b) {
  if (a.size() != b.size())
    fail(errc::dim_mismatch, "geometry", "subtract requires boxes of equal dimension");
  if (!a.intersects(b)) return {a};
  std::vector<Box> out;
  Box rest = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (rest[i].lo < b[i].lo) {
      Box piece = rest;
      piece[i] = Interval(rest[i].lo, b[i].lo);
      out.push_back(std::move(piece));
      rest[i] = Interval(b[i].lo, rest[i].hi);
    }
    if (rest[i].hi > b[i].hi) {
      Box piece = rest;
      piece[i] = Interval(b[i].hi, rest[i].hi);
      out.push_back(std::move(piece));
      rest[i] = Interval(rest[i].lo, b[i].hi);
    }
  }
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Box& b) {
  os << "{";
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i) os << " x ";
    os << b[i];
  }
  return os << "}";
}

}  // namespace mosaic
