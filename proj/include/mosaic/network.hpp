#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mosaic/box.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/interval.hpp"

namespace mosaic {

enum class LayerKind { affine, relu };

struct Layer {
  LayerKind kind = LayerKind::relu;
  std::vector<std::vector<double>> weights;  // out rows of in entries
  std::vector<double> bias;                  // out entries
};

inline Layer affine_layer(std::vector<std::vector<double>> w, std::vector<double> b) {
  return Layer{LayerKind::affine, std::move(w), std::move(b)};
}

inline Layer relu_layer() { return Layer{LayerKind::relu, {}, {}}; }

// Feed-forward network: ordered affine/ReLU layers over a fixed input width.
// For a policy network the outputs are per-action scores.
class Network {
 public:
  Network(std::size_t input_dim, std::vector<Layer> layers)
      : input_dim_(input_dim), layers_(std::move(layers)) {
    std::size_t cur = input_dim_;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
      const Layer& l = layers_[li];
      if (l.kind == LayerKind::relu) continue;
      if (l.weights.empty())
        fail(errc::shape_mismatch, "network",
             "affine layer " + std::to_string(li) + " has no rows");
      for (const auto& row : l.weights)
        if (row.size() != cur)
          fail(errc::shape_mismatch, "network",
               "affine layer " + std::to_string(li) + " expects input width " +
                   std::to_string(cur) + ", row has " + std::to_string(row.size()));
      if (l.bias.size() != l.weights.size())
        fail(errc::shape_mismatch, "network",
             "affine layer " + std::to_string(li) + " has " + std::to_string(l.weights.size()) +
                 " rows but " + std::to_string(l.bias.size()) + " bias entries");
      cur = l.weights.size();
    }
    output_dim_ = cur;
  }

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::size_t input_dim_;
  std::size_t output_dim_;
  std::vector<Layer> layers_;
};

struct OutputBounds {
  std::vector<double> lb;
  std::vector<double> ub;
};

// Exact floating-point forward pass; accumulation is bias-first then
// one product per input in index order (the interval propagation mirrors
// this order so its enclosure covers this exact pass).
inline std::vector<double> forward(const Network& net, const Point& x) {
  if (x.size() != net.input_dim())
    fail(errc::dim_mismatch, "network",
         "input has dimension " + std::to_string(x.size()) + ", network expects " +
             std::to_string(net.input_dim()));
  std::vector<double> cur = x;
  std::vector<double> next;
  for (const Layer& l : net.layers()) {
    if (l.kind == LayerKind::relu) {
      for (double& v : cur) v = std::max(0.0, v);
      continue;
    }
    next.assign(l.weights.size(), 0.0);
    for (std::size_t o = 0; o < l.weights.size(); ++o) {
      double acc = l.bias[o];
      const auto& row = l.weights[o];
      for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * cur[i];
      next[o] = acc;
    }
    cur = next;
  }
  return cur;
}

// Index of the maximal output; ties break toward the lowest index.
inline std::size_t policy_action(const Network& net, const Point& x) {
  const std::vector<double> q = forward(net, x);
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return best;
}

// Appends layers computing max over a' != a of (q[a'] - q[a]) as a scalar:
// negative exactly when a is the strict argmax. The reduction uses
// max(x, y) = y + relu(x - y), with y recovered as relu(y) - relu(-y).
inline Network add_action_layer(const Network& net, std::size_t a) {
  const std::size_t m = net.output_dim();
  if (m < 2)
    fail(errc::bad_action_index, "network",
         "action layer requires at least 2 outputs, network has " + std::to_string(m));
  if (a >= m)
    fail(errc::bad_action_index, "network",
         "action index " + std::to_string(a) + " out of range for " + std::to_string(m) +
             " actions");
  std::vector<Layer> layers = net.layers();
  std::vector<std::vector<double>> diff;
  for (std::size_t ap = 0; ap < m; ++ap) {
    if (ap == a) continue;
    std::vector<double> row(m, 0.0);
    row[ap] = 1.0;
    row[a] = -1.0;
    diff.push_back(std::move(row));
  }
  std::vector<double> zeros(diff.size(), 0.0);
  layers.push_back(affine_layer(std::move(diff), std::move(zeros)));
  std::size_t width = m - 1;
  while (width > 1) {
    const std::size_t pairs = width / 2;
    const bool odd = width % 2 != 0;
    // Expand each pair (x, y) to (x - y, y, -y); a leftover z becomes (z, -z).
    std::vector<std::vector<double>> expand;
    for (std::size_t p = 0; p < pairs; ++p) {
      std::vector<double> r1(width, 0.0), r2(width, 0.0), r3(width, 0.0);
      r1[2 * p] = 1.0;
      r1[2 * p + 1] = -1.0;
      r2[2 * p + 1] = 1.0;
      r3[2 * p + 1] = -1.0;
      expand.push_back(std::move(r1));
      expand.push_back(std::move(r2));
      expand.push_back(std::move(r3));
    }
    if (odd) {
      std::vector<double> r1(width, 0.0), r2(width, 0.0);
      r1[width - 1] = 1.0;
      r2[width - 1] = -1.0;
      expand.push_back(std::move(r1));
      expand.push_back(std::move(r2));
    }
    const std::size_t expanded = expand.size();
    layers.push_back(affine_layer(std::move(expand), std::vector<double>(expanded, 0.0)));
    layers.push_back(relu_layer());
    // Recombine: pair -> relu(x-y) + relu(y) - relu(-y); leftover -> relu(z) - relu(-z).
    const std::size_t out = pairs + (odd ? 1 : 0);
    std::vector<std::vector<double>> combine(out, std::vector<double>(expanded, 0.0));
    for (std::size_t p = 0; p < pairs; ++p) {
      combine[p][3 * p] = 1.0;
      combine[p][3 * p + 1] = 1.0;
      combine[p][3 * p + 2] = -1.0;
    }
    if (odd) {
      combine[out - 1][3 * pairs] = 1.0;
      combine[out - 1][3 * pairs + 1] = -1.0;
    }
    layers.push_back(affine_layer(std::move(combine), std::vector<double>(out, 0.0)));
    width = out;
  }
  return Network(net.input_dim(), std::move(layers));
}

namespace detail {

// Shared by both bounding methods so their naive components are bitwise
// identical; accumulation order matches forward().
inline std::vector<Interval> affine_interval(const Layer& l, const std::vector<Interval>& in) {
  std::vector<Interval> out(l.weights.size());
  for (std::size_t o = 0; o < l.weights.size(); ++o) {
    Interval acc(l.bias[o]);
    const auto& row = l.weights[o];
    for (std::size_t i = 0; i < row.size(); ++i) acc += Interval(row[i]) * in[i];
    out[o] = acc;
  }
  return out;
}

inline void relu_interval(std::vector<Interval>& v) {
  for (Interval& iv : v) iv = Interval(std::max(iv.lo, 0.0), std::max(iv.hi, 0.0));
}

}  // namespace detail

// Sound per-output bounds by naive interval propagation.
inline OutputBounds bounds_interval(const Network& net, const Box& b) {
  if (b.size() != net.input_dim())
    fail(errc::dim_mismatch, "network",
         "box dimension " + std::to_string(b.size()) + " does not match input width " +
             std::to_string(net.input_dim()));
  std::vector<Interval> cur = b.dims();
  for (const Layer& l : net.layers()) {
    if (l.kind == LayerKind::relu)
      detail::relu_interval(cur);
    else
      cur = detail::affine_interval(l, cur);
  }
  OutputBounds out;
  out.lb.reserve(cur.size());
  out.ub.reserve(cur.size());
  for (const Interval& iv : cur) {
    out.lb.push_back(iv.lo);
    out.ub.push_back(iv.hi);
  }
  return out;
}

// Upper chord of relu over pre-activation range [l, u] with l < 0 < u,
// evaluated at x: relu(x) <= u*(x - l)/(u - l).
inline double planet_upper_relaxation(double l, double u, double x) {
  return u * (x - l) / (u - l);
}

namespace detail {

// Linear form over the input variables with interval coefficients; the value
// set of a neuron is bracketed by a lower and an upper form evaluated over
// the input box.
struct LinForm {
  Interval c0;
  std::vector<Interval> c;
};

inline Interval eval_form(const LinForm& f, const Box& b) {
  Interval acc = f.c0;
  for (std::size_t i = 0; i < f.c.size(); ++i) acc += f.c[i] * b[i];
  return acc;
}

inline LinForm scale_form(const LinForm& f, const Interval& s) {
  LinForm out;
  out.c0 = s * f.c0;
  out.c.reserve(f.c.size());
  for (const Interval& ci : f.c) out.c.push_back(s * ci);
  return out;
}

inline void add_scaled(LinForm& acc, const LinForm& f, double w) {
  const Interval iw(w);
  acc.c0 += iw * f.c0;
  for (std::size_t i = 0; i < f.c.size(); ++i) acc.c[i] += iw * f.c[i];
}

inline LinForm zero_form(std::size_t n) {
  LinForm f;
  f.c0 = Interval(0.0);
  f.c.assign(n, Interval(0.0));
  return f;
}

}  // namespace detail

// Sound per-output bounds by symbolic linear relaxation: exact pass-through
// for stable ReLUs, chord upper bound and the area-minimizing linear lower
// bound (x if u > -l, else 0) for unstable ones. Every neuron's range is the
// meet of the symbolic bounds with the naive interval bounds, so the result
// is never looser than bounds_interval.
inline OutputBounds bounds_planet(const Network& net, const Box& b) {
  if (b.size() != net.input_dim())
    fail(errc::dim_mismatch, "network",
         "box dimension " + std::to_string(b.size()) + " does not match input width " +
             std::to_string(net.input_dim()));
  using detail::LinForm;
  const std::size_t n = net.input_dim();
  std::vector<LinForm> low(n), up(n);
  for (std::size_t i = 0; i < n; ++i) {
    LinForm f = detail::zero_form(n);
    f.c[i] = Interval(1.0);
    low[i] = f;
    up[i] = std::move(f);
  }
  std::vector<Interval> naive = b.dims();
  for (const Layer& l : net.layers()) {
    if (l.kind == LayerKind::affine) {
      const std::size_t out_n = l.weights.size();
      std::vector<LinForm> nlow(out_n), nup(out_n);
      for (std::size_t o = 0; o < out_n; ++o) {
        LinForm lo_acc = detail::zero_form(n);
        LinForm up_acc = detail::zero_form(n);
        lo_acc.c0 = Interval(l.bias[o]);
        up_acc.c0 = Interval(l.bias[o]);
        const auto& row = l.weights[o];
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (row[i] == 0.0) continue;
          if (row[i] > 0.0) {
            detail::add_scaled(lo_acc, low[i], row[i]);
            detail::add_scaled(up_acc, up[i], row[i]);
          } else {
            detail::add_scaled(lo_acc, up[i], row[i]);
            detail::add_scaled(up_acc, low[i], row[i]);
          }
        }
        nlow[o] = std::move(lo_acc);
        nup[o] = std::move(up_acc);
      }
      low = std::move(nlow);
      up = std::move(nup);
      naive = detail::affine_interval(l, naive);
      continue;
    }
    for (std::size_t i = 0; i < low.size(); ++i) {
      const double lb = std::max(detail::eval_form(low[i], b).lo, naive[i].lo);
      const double ub = std::min(detail::eval_form(up[i], b).hi, naive[i].hi);
      if (ub <= 0.0) {
        low[i] = detail::zero_form(n);
        up[i] = detail::zero_form(n);
      } else if (lb >= 0.0) {
        // identity phase: forms unchanged
      } else {
        const Interval slope = Interval(ub) / (Interval(ub) - Interval(lb));
        LinForm shifted = up[i];
        shifted.c0 -= Interval(lb);
        up[i] = detail::scale_form(shifted, slope);
        if (!(ub > -lb)) low[i] = detail::zero_form(n);
      }
    }
    detail::relu_interval(naive);
  }
  OutputBounds out;
  out.lb.reserve(low.size());
  out.ub.reserve(low.size());
  for (std::size_t i = 0; i < low.size(); ++i) {
    out.lb.push_back(std::max(detail::eval_form(low[i], b).lo, naive[i].lo));
    out.ub.push_back(std::min(detail::eval_form(up[i], b).hi, naive[i].hi));
  }
  return out;
}

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["input_dim"] = net.input_dim();
  j["layers"] = nlohmann::json::array();
  for (const Layer& l : net.layers()) {
    nlohmann::json jl;
    if (l.kind == LayerKind::relu) {
      jl["kind"] = "relu";
    } else {
      jl["kind"] = "affine";
      jl["weights"] = l.weights;
      jl["bias"] = l.bias;
    }
    j["layers"].push_back(std::move(jl));
  }
  return j;
}

inline Network network_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("input_dim") || !j.contains("layers"))
    fail(errc::parse_error, "network", "network file needs input_dim and layers");
  if (!j["input_dim"].is_number_unsigned() || j["input_dim"].get<std::size_t>() == 0)
    fail(errc::parse_error, "network", "input_dim must be a positive integer");
  if (!j["layers"].is_array())
    fail(errc::parse_error, "network", "layers must be an array");
  std::vector<Layer> layers;
  for (const auto& jl : j["layers"]) {
    if (!jl.is_object() || !jl.contains("kind") || !jl["kind"].is_string())
      fail(errc::parse_error, "network", "each layer needs a string kind");
    const std::string kind = jl["kind"].get<std::string>();
    if (kind == "relu") {
      layers.push_back(relu_layer());
      continue;
    }
    if (kind != "affine")
      fail(errc::parse_error, "network", "unknown layer kind '" + kind + "'");
    if (!jl.contains("weights") || !jl["weights"].is_array() || !jl.contains("bias") ||
        !jl["bias"].is_array())
      fail(errc::parse_error, "network", "affine layer needs weights and bias arrays");
    Layer l;
    l.kind = LayerKind::affine;
    for (const auto& jrow : jl["weights"]) {
      if (!jrow.is_array()) fail(errc::parse_error, "network", "weights must be a matrix");
      std::vector<double> row;
      for (const auto& v : jrow) {
        if (!v.is_number()) fail(errc::parse_error, "network", "weights must be numeric");
        row.push_back(v.get<double>());
      }
      l.weights.push_back(std::move(row));
    }
    for (const auto& v : jl["bias"]) {
      if (!v.is_number()) fail(errc::parse_error, "network", "bias must be numeric");
      l.bias.push_back(v.get<double>());
    }
    layers.push_back(std::move(l));
  }
  return Network(j["input_dim"].get<std::size_t>(), std::move(layers));
}

inline Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "network", "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::parse_error, "network", "invalid JSON in '" + path + "': " + e.what());
  }
  return network_from_json(j);
}

inline void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(errc::io_error, "network", "cannot open '" + path + "' for writing");
  out << network_to_json(net).dump(2) << "\n";
}

}  // namespace mosaic
