#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mosaic/box.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/interval.hpp"

namespace mosaic {

using Action = std::size_t;
using Word = std::vector<Action>;  // sequence of executed actions

inline double sqr(double x) { return x * x; }

enum class EnvKind { pendulum, cartpole };
enum class BoxFailStatus { all_safe, intersects_fail };

// Torque-controlled pendulum: action 0 pushes with -torque, action 1 with
// +torque. Failure when |theta| exceeds theta_fail.
struct PendulumParams {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double torque = 2.0;
  double omega_max = 8.0;
  double theta_fail = 1.0;
};

// Force-controlled cart with a pole, explicit Euler with positions updated
// from the pre-step velocities. Failure when the cart leaves |x| <= x_fail
// or the pole passes |theta| <= theta_fail.
struct CartpoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double force = 10.0;
  double dt = 0.02;
  double x_fail = 2.4;
  double theta_fail = 12.0 * 3.14159265358979323846 / 180.0;
};

namespace detail {

// One template serves the exact pass (T = double) and the enclosure pass
// (T = Interval): identical expression order makes the interval result a
// sound cover of the floating-point result.
template <typename T>
void pendulum_step_t(const PendulumParams& p, std::vector<T>& s, double u) {
  using std::sin;
  const T& theta = s[0];
  const T& omega = s[1];
  T omega_dot = (3.0 * p.gravity / (2.0 * p.length)) * sin(theta) +
                (3.0 / (p.mass * p.length * p.length)) * u;
  T omega_new = clamp(omega + omega_dot * p.dt, -p.omega_max, p.omega_max);
  T theta_new = theta + omega_new * p.dt;
  s[0] = theta_new;
  s[1] = omega_new;
}

template <typename T>
void cartpole_step_t(const CartpoleParams& p, std::vector<T>& s, double u) {
  using std::cos;
  using std::sin;
  const double total_mass = p.cart_mass + p.pole_mass;
  const double polemass_length = p.pole_mass * p.half_length;
  const T& x = s[0];
  const T& x_dot = s[1];
  const T& theta = s[2];
  const T& theta_dot = s[3];
  T costheta = cos(theta);
  T sintheta = sin(theta);
  T temp = (u + polemass_length * sqr(theta_dot) * sintheta) / total_mass;
  T theta_acc = (p.gravity * sintheta - costheta * temp) /
                (p.half_length * (4.0 / 3.0 - p.pole_mass * sqr(costheta) / total_mass));
  T x_acc = temp - polemass_length * theta_acc * costheta / total_mass;
  s[0] = x + p.dt * x_dot;
  s[1] = x_dot + p.dt * x_acc;
  s[2] = theta + p.dt * theta_dot;
  s[3] = theta_dot + p.dt * theta_acc;
}

}  // namespace detail

// Deterministic benchmark dynamics plus their validated interval abstraction,
// the failure predicate, and the initial region.
class Environment {
 public:
  static Environment pendulum(const PendulumParams& p, Box init) {
    Environment e;
    e.kind_ = EnvKind::pendulum;
    e.pendulum_ = p;
    e.state_dim_ = 2;
    e.init_ = std::move(init);
    e.check_init();
    return e;
  }

  static Environment pendulum() {
    return pendulum(PendulumParams{},
                    Box{Interval(-0.35, 0.35), Interval(-0.5, 0.5)});
  }

  static Environment cartpole(const CartpoleParams& p, Box init) {
    Environment e;
    e.kind_ = EnvKind::cartpole;
    e.cartpole_ = p;
    e.state_dim_ = 4;
    e.init_ = std::move(init);
    e.check_init();
    return e;
  }

  static Environment cartpole() {
    return cartpole(CartpoleParams{}, Box{Interval(-0.05, 0.05), Interval(-0.05, 0.05),
                                          Interval(-0.05, 0.05), Interval(-0.05, 0.05)});
  }

  EnvKind kind() const { return kind_; }
  std::string name() const { return kind_ == EnvKind::pendulum ? "pendulum" : "cartpole"; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_count() const { return 2; }
  const Box& init_region() const { return init_; }
  const PendulumParams& pendulum_params() const { return pendulum_; }
  const CartpoleParams& cartpole_params() const { return cartpole_; }

  // Action 0 applies the negative control magnitude, action 1 the positive.
  double control(Action a) const {
    if (a >= action_count())
      fail(errc::bad_action_index, "environment",
           "action " + std::to_string(a) + " out of range");
    const double mag = kind_ == EnvKind::pendulum ? pendulum_.torque : cartpole_.force;
    return a == 0 ? -mag : mag;
  }

  Point step(const Point& s, Action a) const {
    check_state(s.size());
    std::vector<double> v = s;
    apply(v, control(a));
    return v;
  }

  Point step_word(Point s, const Word& w) const {
    check_state(s.size());
    for (Action a : w) s = step(s, a);
    return s;
  }

  // Sound cover: step_word(s, w) lies in the result for every s in b.
  Box abstract_step(const Box& b, const Word& w) const {
    check_state(b.size());
    std::vector<Interval> v = b.dims();
    for (Action a : w) apply(v, control(a));
    return Box(std::move(v));
  }

  bool is_fail(const Point& s) const {
    check_state(s.size());
    if (kind_ == EnvKind::pendulum) return std::abs(s[0]) > pendulum_.theta_fail;
    return std::abs(s[0]) > cartpole_.x_fail || std::abs(s[2]) > cartpole_.theta_fail;
  }

  // Existential lift of is_fail; exact because the predicate compares
  // coordinates against thresholds.
  BoxFailStatus box_fail_status(const Box& b) const {
    check_state(b.size());
    const auto exceeds = [](const Interval& iv, double t) { return iv.lo < -t || iv.hi > t; };
    bool hit = false;
    if (kind_ == EnvKind::pendulum) {
      hit = exceeds(b[0], pendulum_.theta_fail);
    } else {
      hit = exceeds(b[0], cartpole_.x_fail) || exceeds(b[2], cartpole_.theta_fail);
    }
    return hit ? BoxFailStatus::intersects_fail : BoxFailStatus::all_safe;
  }

 private:
  Environment() = default;

  template <typename T>
  void apply(std::vector<T>& v, double u) const {
    if (kind_ == EnvKind::pendulum)
      detail::pendulum_step_t(pendulum_, v, u);
    else
      detail::cartpole_step_t(cartpole_, v, u);
  }

  void check_state(std::size_t n) const {
    if (n != state_dim_)
      fail(errc::dim_mismatch, "environment",
           "state has dimension " + std::to_string(n) + ", environment expects " +
               std::to_string(state_dim_));
  }

  void check_init() const {
    if (init_.size() != state_dim_)
      fail(errc::dim_mismatch, "environment",
           "initial region dimension " + std::to_string(init_.size()) + " does not match " +
               std::to_string(state_dim_));
  }

  EnvKind kind_ = EnvKind::pendulum;
  PendulumParams pendulum_{};
  CartpoleParams cartpole_{};
  std::size_t state_dim_ = 2;
  Box init_;
};

}  // namespace mosaic
