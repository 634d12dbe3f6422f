#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "mosaic/environment.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/faults.hpp"
#include "mosaic/mdp.hpp"
#include "mosaic/network.hpp"
#include "mosaic/parallel.hpp"

namespace mosaic {

namespace detail {

// Kahan-compensated dot of (probability, value) pairs; plain summation is
// kept for narrow distributions so small models stay bit-identical with the
// hand-computed expectation.
template <typename Value>
double expected_value(const std::vector<std::pair<double, std::size_t>>& dist,
                      const Value& value) {
  if (dist.size() <= 8) {
    double acc = 0.0;
    for (const auto& [p, dst] : dist) acc += p * value(dst);
    return acc;
  }
  double acc = 0.0, comp = 0.0;
  for (const auto& [p, dst] : dist) {
    const double term = p * value(dst) - comp;
    const double t = acc + term;
    comp = (t - acc) - term;
    acc = t;
  }
  return acc;
}

}  // namespace detail

// Max probability of reaching a fail state within k steps, by exact backward
// induction over the depth layers: 1 on fail states, 0 at the horizon, else
// the best choice's expectation. Values are clamped to [0, 1].
inline std::vector<double> max_reach(const AbstractMdp& mdp, int k) {
  if (k < 0) fail(errc::not_layered, "check", "horizon must be non-negative");
  for (std::size_t s = 0; s < mdp.state_count(); ++s) {
    const int d = mdp.state(s).depth;
    if (d < 0 || d > k)
      fail(errc::not_layered, "check",
           "state " + std::to_string(s) + " at depth " + std::to_string(d) +
               " outside [0, " + std::to_string(k) + "]");
    for (const Choice& c : mdp.choices(s))
      for (const auto& [p, dst] : c.dist)
        if (mdp.state(dst).depth != d + 1)
          fail(errc::not_layered, "check",
               "transition " + std::to_string(s) + " -> " + std::to_string(dst) +
                   " does not advance depth by 1");
  }
  std::vector<double> value(mdp.state_count(), 0.0);
  // Group by depth, deepest first; within a layer states are independent.
  std::vector<std::vector<std::size_t>> layers(static_cast<std::size_t>(k) + 1);
  for (std::size_t s = 0; s < mdp.state_count(); ++s)
    layers[static_cast<std::size_t>(mdp.state(s).depth)].push_back(s);
  for (int d = k; d >= 0; --d) {
    const auto& layer = layers[static_cast<std::size_t>(d)];
    parallel_for(layer.size(), [&](std::size_t i) {
      const std::size_t s = layer[i];
      if (mdp.state(s).fail) {
        value[s] = 1.0;
        return;
      }
      if (d == k) {
        value[s] = 0.0;
        return;
      }
      double best = 0.0;
      for (const Choice& c : mdp.choices(s))
        best = std::max(best, detail::expected_value(c.dist,
                                                     [&](std::size_t t) { return value[t]; }));
      value[s] = std::clamp(best, 0.0, 1.0);
    });
  }
  return value;
}

// Same recursion on an imported flat model: k rounds of value iteration,
// exact because each round extends the horizon by one.
inline std::vector<double> flat_max_reach(const FlatMdp& m, int k) {
  std::vector<double> value(m.state_count, 0.0);
  for (std::size_t s = 0; s < m.state_count; ++s) value[s] = m.fail[s] ? 1.0 : 0.0;
  std::vector<double> next(m.state_count, 0.0);
  for (int round = 0; round < k; ++round) {
    for (std::size_t s = 0; s < m.state_count; ++s) {
      if (m.fail[s]) {
        next[s] = 1.0;
        continue;
      }
      double best = 0.0;
      for (const auto& dist : m.choices[s])
        best = std::max(best, detail::expected_value(dist,
                                                     [&](std::size_t t) { return value[t]; }));
      next[s] = std::clamp(best, 0.0, 1.0);
    }
    value.swap(next);
  }
  return value;
}

// Exact failure probability of the concrete closed loop from s0 within k
// steps: at each state the policy picks an action, the fault model expands
// it into weighted words, each word is one probabilistic transition.
inline double concrete_reach(const Network& net, const Environment& env, const FaultModel& f,
                             const Point& s0, int k) {
  if (env.is_fail(s0)) return 1.0;
  if (k <= 0) return 0.0;
  const std::size_t a = policy_action(net, s0);
  double acc = 0.0;
  for (const Outcome& o : f.outcomes(a))
    acc += o.probability * concrete_reach(net, env, f, env.step_word(s0, o.word), k - 1);
  return std::clamp(acc, 0.0, 1.0);
}

// Value of the abstraction under the policy that, tracking the concrete
// state s inside the abstract state, always picks a choice whose provenance
// contains s and whose action matches the policy at s. Sits between
// concrete_reach(s0, k) and max_reach by construction, which the tests
// verify on sampled states.
inline double policy_eval_reach(const AbstractMdp& mdp, const Network& net,
                                const Environment& env, std::size_t sid, const Point& s,
                                int k) {
  const MdpState& st = mdp.state(sid);
  if (st.fail) return 1.0;
  if (st.depth >= k) return 0.0;
  const auto& cs = mdp.choices(sid);
  const std::size_t want = policy_action(net, s);
  std::size_t pick = AbstractMdp::npos;
  std::size_t fallback = AbstractMdp::npos;
  for (std::size_t j = 0; j < cs.size(); ++j) {
    if (!cs[j].provenance.contains(s)) continue;
    if (fallback == AbstractMdp::npos) fallback = j;
    if (cs[j].action == want) {
      pick = j;
      break;
    }
  }
  if (pick == AbstractMdp::npos) pick = fallback;
  if (pick == AbstractMdp::npos)
    fail(errc::domain, "check",
         "no choice of state " + std::to_string(sid) + " covers the tracked concrete state");
  const Choice& c = cs[pick];
  double acc = 0.0;
  for (const WordOutcome& o : c.outcomes)
    acc += o.probability *
           policy_eval_reach(mdp, net, env, o.successor, env.step_word(s, o.word), k);
  return std::clamp(acc, 0.0, 1.0);
}

}  // namespace mosaic
