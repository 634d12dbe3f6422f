#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>

#include "mosaic/errors.hpp"

namespace mosaic {

namespace detail {

inline double next_down(double x) {
  return std::nextafter(x, -std::numeric_limits<double>::infinity());
}

inline double next_up(double x) {
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}

}  // namespace detail

// Closed interval [lo, hi] with lo <= hi; degenerate intervals allowed.
// Arithmetic rounds endpoints outward so the floating-point interval always
// encloses the real result; see detail below for how the direction is chosen.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double v) : lo(v), hi(v) {}  // NOLINT: implicit by design
  Interval(double l, double h) : lo(l), hi(h) {
    assert(!(l > h) && "interval bounds out of order");
    assert(!std::isnan(l) && !std::isnan(h));
  }

  double width() const { return hi - lo; }
  double mid() const { return lo + (hi - lo) / 2.0; }
  bool degenerate() const { return lo == hi; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
  bool operator!=(const Interval& o) const { return !(*this == o); }
};

namespace detail {

// Endpoint arithmetic with directed rounding recovered from exact residuals:
// 2Sum for +/- and an fma probe for * and /. The residual's sign says which
// way round-to-nearest erred, so an endpoint is nudged only when the computed
// value actually lies on the wrong side. Near overflow/underflow the residual
// theorems stop applying and we fall back to an unconditional 1-ulp nudge.

inline double add_residual(double a, double b, double s) {
  const double bp = s - a;
  return (a - (s - bp)) + (b - bp);  // exact for finite s
}

inline double add_down(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return next_down(s);
  return add_residual(a, b, s) < 0.0 ? next_down(s) : s;
}

inline double add_up(double a, double b) {
  const double s = a + b;
  if (!std::isfinite(s)) return next_up(s);
  return add_residual(a, b, s) > 0.0 ? next_up(s) : s;
}

inline double sub_down(double a, double b) { return add_down(a, -b); }
inline double sub_up(double a, double b) { return add_up(a, -b); }

// a*b - fl(a*b) is representable only when fl(a*b) neither overflows nor
// lands in the subnormal range.
inline bool product_residual_exact(double a, double b, double p) {
  if (a == 0.0 || b == 0.0) return true;
  return std::isfinite(p) && std::abs(p) >= std::numeric_limits<double>::min();
}

inline double mul_down(double a, double b) {
  const double p = a * b;
  if (!product_residual_exact(a, b, p)) return next_down(p);
  return std::fma(a, b, -p) < 0.0 ? next_down(p) : p;
}

inline double mul_up(double a, double b) {
  const double p = a * b;
  if (!product_residual_exact(a, b, p)) return next_up(p);
  return std::fma(a, b, -p) > 0.0 ? next_up(p) : p;
}

// For q = fl(a/b), fma(q, b, -a) = q*b - a exactly when neither a nor q is
// extreme; true quotient = q - residual/b.
inline bool quotient_residual_exact(double a, double q) {
  if (a == 0.0) return true;  // q is an exact zero
  const double tiny = std::numeric_limits<double>::min();
  return std::isfinite(q) && std::abs(a) >= tiny && std::abs(q) >= tiny;
}

inline double div_down(double a, double b) {
  const double q = a / b;
  if (!quotient_residual_exact(a, q)) return next_down(q);
  const double r = std::fma(q, b, -a);
  const bool exceeds = (r > 0.0 && b > 0.0) || (r < 0.0 && b < 0.0);
  return exceeds ? next_down(q) : q;
}

inline double div_up(double a, double b) {
  const double q = a / b;
  if (!quotient_residual_exact(a, q)) return next_up(q);
  const double r = std::fma(q, b, -a);
  const bool undershoots = (r < 0.0 && b > 0.0) || (r > 0.0 && b < 0.0);
  return undershoots ? next_up(q) : q;
}

// Transcendental results get two ulps of slack: libm is not guaranteed
// correctly rounded.
inline Interval widened2(double lo, double hi) {
  return Interval(next_down(next_down(lo)), next_up(next_up(hi)));
}

}  // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) {
  return Interval(detail::add_down(a.lo, b.lo), detail::add_up(a.hi, b.hi));
}

inline Interval operator-(const Interval& a, const Interval& b) {
  return Interval(detail::sub_down(a.lo, b.hi), detail::sub_up(a.hi, b.lo));
}

inline Interval operator-(const Interval& a) { return Interval(-a.hi, -a.lo); }

inline Interval operator*(const Interval& a, const Interval& b) {
  const double lo = std::min(
      std::min(detail::mul_down(a.lo, b.lo), detail::mul_down(a.lo, b.hi)),
      std::min(detail::mul_down(a.hi, b.lo), detail::mul_down(a.hi, b.hi)));
  const double hi = std::max(
      std::max(detail::mul_up(a.lo, b.lo), detail::mul_up(a.lo, b.hi)),
      std::max(detail::mul_up(a.hi, b.lo), detail::mul_up(a.hi, b.hi)));
  return Interval(lo, hi);
}

// Divisor must not contain zero.
inline Interval operator/(const Interval& a, const Interval& b) {
  if (b.lo <= 0.0 && 0.0 <= b.hi)
    fail(errc::domain, "geometry", "interval division by an interval containing zero");
  const double lo = std::min(
      std::min(detail::div_down(a.lo, b.lo), detail::div_down(a.lo, b.hi)),
      std::min(detail::div_down(a.hi, b.lo), detail::div_down(a.hi, b.hi)));
  const double hi = std::max(
      std::max(detail::div_up(a.lo, b.lo), detail::div_up(a.lo, b.hi)),
      std::max(detail::div_up(a.hi, b.lo), detail::div_up(a.hi, b.hi)));
  return Interval(lo, hi);
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }

// Tighter than a*a when the interval straddles zero.
inline Interval sqr(const Interval& a) {
  const double m = std::max(std::abs(a.lo), std::abs(a.hi));
  double lo = 0.0;
  if (!(a.lo <= 0.0 && 0.0 <= a.hi)) {
    const double n = std::min(std::abs(a.lo), std::abs(a.hi));
    lo = detail::mul_down(n, n);
  }
  return Interval(lo, detail::mul_up(m, m));
}

inline Interval intersect(const Interval& a, const Interval& b) {
  assert(a.intersects(b));
  return Interval(std::max(a.lo, b.lo), std::min(a.hi, b.hi));
}

inline Interval hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
}

// Monotone lift of the scalar clamp; collapses to the nearest bound when the
// interval lies wholly outside [lo, hi].
inline Interval clamp(const Interval& a, double lo, double hi) {
  assert(lo <= hi);
  return Interval(std::clamp(a.lo, lo, hi), std::clamp(a.hi, lo, hi));
}

inline double clamp(double x, double lo, double hi) { return std::clamp(x, lo, hi); }

namespace detail {

// True if some x in [lo, hi] satisfies x = offset + period*k for integer k.
inline bool contains_critical(double lo, double hi, double offset, double period) {
  const double k = std::ceil((lo - offset) / period);
  const double point = offset + k * period;
  // Guard against rounding in the ceil/multiply chain by checking neighbours.
  for (int d = -1; d <= 1; ++d) {
    const double p = offset + (k + d) * period;
    if (lo <= p && p <= hi) return true;
  }
  return lo <= point && point <= hi;
}

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

}  // namespace detail

inline Interval sin(const Interval& a) {
  if (a.width() >= detail::kTwoPi) return Interval(-1.0, 1.0);
  const double slo = std::sin(a.lo);
  const double shi = std::sin(a.hi);
  double lo = std::min(slo, shi);
  double hi = std::max(slo, shi);
  Interval r = detail::widened2(lo, hi);
  // Maxima at pi/2 + 2k*pi, minima at -pi/2 + 2k*pi.
  if (detail::contains_critical(a.lo, a.hi, detail::kPi / 2.0, detail::kTwoPi)) r.hi = 1.0;
  if (detail::contains_critical(a.lo, a.hi, -detail::kPi / 2.0, detail::kTwoPi)) r.lo = -1.0;
  return Interval(std::max(r.lo, -1.0), std::min(r.hi, 1.0));
}

inline Interval cos(const Interval& a) {
  if (a.width() >= detail::kTwoPi) return Interval(-1.0, 1.0);
  const double clo = std::cos(a.lo);
  const double chi = std::cos(a.hi);
  double lo = std::min(clo, chi);
  double hi = std::max(clo, chi);
  Interval r = detail::widened2(lo, hi);
  // Maxima at 2k*pi, minima at pi + 2k*pi.
  if (detail::contains_critical(a.lo, a.hi, 0.0, detail::kTwoPi)) r.hi = 1.0;
  if (detail::contains_critical(a.lo, a.hi, detail::kPi, detail::kTwoPi)) r.lo = -1.0;
  return Interval(std::max(r.lo, -1.0), std::min(r.hi, 1.0));
}

inline std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  return os << "[" << iv.lo << ", " << iv.hi << "]";
}

}  // namespace mosaic
