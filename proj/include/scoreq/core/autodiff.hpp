#ifndef SCOREQ_CORE_AUTODIFF_HPP_
#define SCOREQ_CORE_AUTODIFF_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scoreq/core/matrix.hpp"

namespace scoreq {

/// Learning-rate group a trainable weight belongs to.
enum class ParamGroup { encoder, head };

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  ParamGroup group = ParamGroup::encoder;

  Parameter() = default;
  Parameter(std::string n, Matrix v, ParamGroup g = ParamGroup::encoder)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()), group(g) {}

  void zero_grad() {
    if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
    grad.set_zero();
  }
};

class Tape;

/// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Record of primitive operations executed during one forward pass.
///
/// Each node holds its value, a lazily allocated gradient, and a closure that
/// pushes the node's gradient into its inputs. backward() replays the closures
/// in exact reverse order of recording, then accumulates leaf gradients into
/// the bound Parameters.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, nullptr, false});
    return {this, nodes_.size() - 1};
  }

  Var parameter(Parameter& p) {
    nodes_.push_back(Node{p.value, {}, nullptr, &p, true});
    return {this, nodes_.size() - 1};
  }

  /// Records an op node. needs_grad should be true iff any input needs a
  /// gradient; when false the closure is dropped and the node acts as a constant.
  Var record(Matrix value, bool needs_grad, Backward backward) {
    nodes_.push_back(Node{std::move(value), {}, needs_grad ? std::move(backward) : nullptr,
                          nullptr, needs_grad});
    return {this, nodes_.size() - 1};
  }

  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
  bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }
  bool needs_grad(const Var& v) const { return needs_grad(v.id()); }

  Matrix& grad(std::size_t id) {
    Node& n = nodes_.at(id);
    if (!n.grad.same_shape(n.value) || n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
    return n.grad;
  }
  const Matrix& grad_or_empty(std::size_t id) const { return nodes_.at(id).grad; }

  std::size_t size() const { return nodes_.size(); }

  /// Reverse pass from a scalar root. Parameter grads are accumulated (+=).
  void backward(const Var& root) {
    if (root.value().size() != 1) {
      throw DimensionError("Tape::backward: root must be scalar, got " +
                           root.value().shape_string());
    }
    visit_order_.clear();
    if (!nodes_[root.id()].needs_grad) return;
    grad(root.id())[0] = 1.0;
    for (std::size_t id = root.id() + 1; id-- > 0;) {
      Node& n = nodes_[id];
      if (!n.backward || n.grad.empty()) continue;
      visit_order_.push_back(id);
      n.backward(*this, id);
    }
    for (Node& n : nodes_) {
      if (n.param == nullptr) continue;
      if (!n.param->grad.same_shape(n.param->value)) n.param->zero_grad();
      if (!n.grad.empty()) n.param->grad += n.grad;
    }
  }

  /// Op ids in the order the last backward() executed them.
  const std::vector<std::size_t>& last_backward_order() const { return visit_order_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param;
    bool needs_grad;
  };

  std::vector<Node> nodes_;
  std::vector<std::size_t> visit_order_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }

class EmptySequenceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Differentiable primitives. Each records one node on the tape of its inputs.
namespace ad {

inline Var matmul(const Var& a, const Var& b) {
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  const bool ng = t.needs_grad(ia) || t.needs_grad(ib);
  return t.record(scoreq::matmul(a.value(), b.value()), ng, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.needs_grad(ia)) tp.grad(ia) += matmul_nt(g, tp.value(ib));
    if (tp.needs_grad(ib)) tp.grad(ib) += matmul_tn(tp.value(ia), g);
  });
}

/// x (R x C) plus a 1 x C bias broadcast over rows.
inline Var add_bias(const Var& x, const Var& bias) {
  Tape& t = x.tape();
  const Matrix& xv = x.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw DimensionError("add_bias: " + xv.shape_string() + " with bias " + bv.shape_string());
  }
  Matrix out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv(0, c);
  const std::size_t ix = x.id(), ib = bias.id();
  const bool ng = t.needs_grad(ix) || t.needs_grad(ib);
  return t.record(std::move(out), ng, [ix, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.needs_grad(ix)) tp.grad(ix) += g;
    if (tp.needs_grad(ib)) {
      Matrix& gb = tp.grad(ib);
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
    }
  });
}

inline Var relu(const Var& x) {
  Tape& t = x.tape();
  Matrix out = x.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.id();
  return t.record(std::move(out), t.needs_grad(ix), [ix](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    const Matrix& xv = tp.value(ix);
    Matrix& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > 0.0) gx[i] += g[i];
  });
}

/// Mean over contiguous row segments. offsets has one entry per segment plus a
/// terminal entry equal to x.rows(); segment s spans rows [offsets[s], offsets[s+1]).
inline Var segment_mean(const Var& x, std::vector<std::size_t> offsets) {
  Tape& t = x.tape();
  const Matrix& xv = x.value();
  if (offsets.size() < 2 || offsets.back() != xv.rows()) {
    throw DimensionError("segment_mean: offsets do not cover the input rows");
  }
  const std::size_t segs = offsets.size() - 1;
  Matrix out(segs, xv.cols());
  for (std::size_t s = 0; s < segs; ++s) {
    const std::size_t begin = offsets[s], end = offsets[s + 1];
    if (end <= begin) throw EmptySequenceError("segment_mean: empty sequence");
    auto o = out.row(s);
    for (std::size_t r = begin; r < end; ++r) {
      auto xr = xv.row(r);
      for (std::size_t c = 0; c < o.size(); ++c) o[c] += xr[c];
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    for (double& v : o) v *= inv;
  }
  const std::size_t ix = x.id();
  return t.record(std::move(out), t.needs_grad(ix),
                  [ix, offsets = std::move(offsets)](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad(self);
                    Matrix& gx = tp.grad(ix);
                    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
                      const double inv = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
                      auto gr = g.row(s);
                      for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
                        auto gxr = gx.row(r);
                        for (std::size_t c = 0; c < gr.size(); ++c) gxr[c] += gr[c] * inv;
                      }
                    }
                  });
}

/// Guard added under the square root in the backward pass of non-squared
/// distances; the gradient at coincident points is therefore exactly zero.
inline constexpr double kDistanceEpsilon = 1e-12;

inline Matrix pairwise_distance_matrix(const Matrix& z, bool squared) {
  const std::size_t n = z.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = squared_distance(z.row(i), z.row(j));
      const double v = squared ? s : std::sqrt(s);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

/// N x N matrix of Euclidean (or squared Euclidean) distances between rows of z.
inline Var pairwise_dist(const Var& z, bool squared) {
  Tape& t = z.tape();
  if (z.value().rows() < 2) throw DimensionError("pairwise_dist: need at least 2 rows");
  const std::size_t iz = z.id();
  return t.record(pairwise_distance_matrix(z.value(), squared), t.needs_grad(iz),
                  [iz, squared](Tape& tp, std::size_t self) {
                    const Matrix& g = tp.grad(self);
                    const Matrix& zv = tp.value(iz);
                    const Matrix& dv = tp.value(self);
                    Matrix& gz = tp.grad(iz);
                    const std::size_t n = zv.rows(), dim = zv.cols();
                    for (std::size_t i = 0; i < n; ++i) {
                      for (std::size_t j = i + 1; j < n; ++j) {
                        const double gij = g(i, j) + g(j, i);
                        if (gij == 0.0) continue;
                        double coef;
                        if (squared) {
                          coef = 2.0 * gij;
                        } else {
                          const double s = dv(i, j) * dv(i, j);
                          coef = gij / std::sqrt(s + kDistanceEpsilon);
                        }
                        auto zi = zv.row(i);
                        auto zj = zv.row(j);
                        auto gi = gz.row(i);
                        auto gj = gz.row(j);
                        for (std::size_t c = 0; c < dim; ++c) {
                          const double diff = coef * (zi[c] - zj[c]);
                          gi[c] += diff;
                          gj[c] -= diff;
                        }
                      }
                    }
                  });
}

/// Mean of (pred - target)^2 over all entries; pred and target share a shape.
inline Var mean_squared_error(const Var& pred, const Matrix& target) {
  Tape& t = pred.tape();
  const Matrix& pv = pred.value();
  if (!pv.same_shape(target)) {
    throw DimensionError("mean_squared_error: " + pv.shape_string() + " vs " +
                         target.shape_string());
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - target[i];
    s += d * d;
  }
  const double n = static_cast<double>(pv.size());
  const std::size_t ip = pred.id();
  return t.record(Matrix(1, 1, s / n), t.needs_grad(ip),
                  [ip, target, n](Tape& tp, std::size_t self) {
                    const double g = tp.grad(self)[0];
                    const Matrix& pv = tp.value(ip);
                    Matrix& gp = tp.grad(ip);
                    for (std::size_t i = 0; i < pv.size(); ++i)
                      gp[i] += g * 2.0 * (pv[i] - target[i]) / n;
                  });
}

inline Var sum(const Var& x) {
  Tape& t = x.tape();
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  const std::size_t ix = x.id();
  return t.record(Matrix(1, 1, s), t.needs_grad(ix), [ix](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    for (double& v : tp.grad(ix).data()) v += g;
  });
}

inline Var scale(const Var& x, double s) {
  Tape& t = x.tape();
  Matrix out = x.value();
  out *= s;
  const std::size_t ix = x.id();
  return t.record(std::move(out), t.needs_grad(ix), [ix, s](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    Matrix& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += s * g[i];
  });
}

/// Elementwise product of two same-shape nodes.
inline Var hadamard(const Var& a, const Var& b) {
  Tape& t = a.tape();
  if (!a.value().same_shape(b.value())) throw DimensionError("hadamard: shape mismatch");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  const bool ng = t.needs_grad(ia) || t.needs_grad(ib);
  return t.record(std::move(out), ng, [ia, ib](Tape& tp, std::size_t self) {
    const Matrix& g = tp.grad(self);
    if (tp.needs_grad(ia)) {
      Matrix& ga = tp.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * tp.value(ib)[i];
    }
    if (tp.needs_grad(ib)) {
      Matrix& gb = tp.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * tp.value(ia)[i];
    }
  });
}

}  // namespace ad
}  // namespace scoreq

#endif  // SCOREQ_CORE_AUTODIFF_HPP_
