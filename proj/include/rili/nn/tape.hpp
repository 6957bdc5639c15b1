#pragma once

// Reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Tape records every operation of one forward pass. Values are stored
// column-major with features along rows and batch samples along columns.
// backward() walks the recording in reverse and accumulates gradients; only
// nodes that depend on a trainable parameter (or on a leaf created with
// variable()) carry gradients at all.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rili/nn/param_set.hpp"

namespace rili::nn {

template <typename T>
class Tape {
 public:
  using Mat = Matrix<T>;
  using Index = Eigen::Index;

  struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
  };

  Var constant(Mat value) { return push(std::move(value), false, {}); }

  // Leaf whose gradient is wanted (inputs in gradient checks, x in tests).
  Var variable(Mat value) { return push(std::move(value), true, {}); }

  // Parameter leaf; repeated calls for the same entry reuse one node so the
  // gradient of a weight shared across time steps is accumulated.
  Var param(const ParamSet<T>& set, std::size_t index, bool trainable = true) {
    for (const auto& leaf : params_) {
      if (leaf.set == &set && leaf.index == index && leaf.trainable == trainable) {
        return Var{leaf.node};
      }
    }
    Var v = push(set.value(index), trainable, {});
    params_.push_back({&set, index, v.id, trainable});
    return v;
  }

  const Mat& value(Var v) const { return nodes_.at(v.id).value; }
  T scalar(Var v) const { return value(v)(0, 0); }

  const Mat& grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    if (n.grad.size() == 0) {
      zero_cache_ = Mat::Zero(n.value.rows(), n.value.cols());
      return zero_cache_;
    }
    return n.grad;
  }

  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // ---- linear algebra ------------------------------------------------------

  Var matmul(Var a, Var b) {
    check(value(a).cols() == value(b).rows(), "matmul: inner dimensions differ");
    Mat out;
    out.noalias() = value(a) * value(b);
    return push(std::move(out), any(a, b), [this, a, b, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      if (needs(a)) grad_ref(a.id).noalias() += g * value(b).transpose();
      if (needs(b)) grad_ref(b.id).noalias() += value(a).transpose() * g;
    });
  }

  Var add(Var a, Var b) {
    check_same(a, b, "add");
    return push(value(a) + value(b), any(a, b), [this, a, b, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      if (needs(a)) grad_ref(a.id) += g;
      if (needs(b)) grad_ref(b.id) += g;
    });
  }

  Var sub(Var a, Var b) {
    check_same(a, b, "sub");
    return push(value(a) - value(b), any(a, b), [this, a, b, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      if (needs(a)) grad_ref(a.id) += g;
      if (needs(b)) grad_ref(b.id) -= g;
    });
  }

  // Elementwise product.
  Var mul(Var a, Var b) {
    check_same(a, b, "mul");
    return push(value(a).cwiseProduct(value(b)), any(a, b), [this, a, b, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      if (needs(a)) grad_ref(a.id) += g.cwiseProduct(value(b));
      if (needs(b)) grad_ref(b.id) += g.cwiseProduct(value(a));
    });
  }

  // x (rows x B) + bias (rows x 1) broadcast over columns.
  Var add_bias(Var x, Var bias) {
    check(value(bias).cols() == 1 && value(bias).rows() == value(x).rows(),
          "add_bias: bias must be a column matching x rows");
    Mat out = value(x).colwise() + value(bias).col(0);
    return push(std::move(out), any(x, bias), [this, x, bias, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      if (needs(x)) grad_ref(x.id) += g;
      if (needs(bias)) grad_ref(bias.id) += g.rowwise().sum();
    });
  }

  Var scale(Var x, T c) {
    return push(value(x) * c, any(x), [this, x, c, o = next_id()] {
      grad_ref(x.id) += nodes_[o].grad * c;
    });
  }

  Var add_scalar(Var x, T c) {
    return push(value(x).array() + c, any(x), [this, x, o = next_id()] {
      grad_ref(x.id) += nodes_[o].grad;
    });
  }

  Var one_minus(Var x) { return add_scalar(scale(x, T(-1)), T(1)); }

  // x * s where s is 1x1.
  Var scale_by(Var x, Var s) {
    check(value(s).size() == 1, "scale_by: s must be 1x1");
    const T sv = value(s)(0, 0);
    return push(value(x) * sv, any(x, s), [this, x, s, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      if (needs(x)) grad_ref(x.id) += g * value(s)(0, 0);
      if (needs(s)) grad_ref(s.id)(0, 0) += g.cwiseProduct(value(x)).sum();
    });
  }

  // ---- elementwise nonlinearities -----------------------------------------

  Var relu(Var x) {
    kinks_.push_back({Kink::kPositive, x.id, 0, T(0), T(0)});
    return push(value(x).cwiseMax(T(0)), any(x), [this, x, o = next_id()] {
      grad_ref(x.id) += (value(x).array() > T(0)).select(nodes_[o].grad.array(), T(0)).matrix();
    });
  }

  Var tanh(Var x) {
    Mat out = value(x).array().tanh().matrix();
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      const Mat& y = nodes_[o].value;
      grad_ref(x.id).array() += nodes_[o].grad.array() * (T(1) - y.array().square());
    });
  }

  Var sigmoid(Var x) {
    Mat out = (T(1) / (T(1) + (-value(x).array()).exp())).matrix();
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      const Mat& y = nodes_[o].value;
      grad_ref(x.id).array() += nodes_[o].grad.array() * y.array() * (T(1) - y.array());
    });
  }

  Var exp(Var x) {
    Mat out = value(x).array().exp().matrix();
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      grad_ref(x.id).array() += nodes_[o].grad.array() * nodes_[o].value.array();
    });
  }

  Var log(Var x) {
    Mat out = value(x).array().log().matrix();
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      grad_ref(x.id).array() += nodes_[o].grad.array() / value(x).array();
    });
  }

  Var square(Var x) {
    return push(value(x).array().square().matrix(), any(x), [this, x, o = next_id()] {
      grad_ref(x.id).array() += T(2) * nodes_[o].grad.array() * value(x).array();
    });
  }

  // log(1 + e^x), evaluated without overflow.
  Var softplus(Var x) {
    Mat out = value(x).unaryExpr([](T v) {
      return v > T(0) ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    });
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      Mat sig = value(x).unaryExpr([](T v) { return T(1) / (T(1) + std::exp(-v)); });
      grad_ref(x.id).array() += nodes_[o].grad.array() * sig.array();
    });
  }

  // Hard clamp; gradient passes only where lo <= x <= hi.
  Var clamp(Var x, T lo, T hi) {
    kinks_.push_back({Kink::kInterval, x.id, 0, lo, hi});
    return push(value(x).cwiseMax(lo).cwiseMin(hi), any(x), [this, x, lo, hi, o = next_id()] {
      const auto& v = value(x).array();
      grad_ref(x.id) += ((v >= lo) && (v <= hi)).select(nodes_[o].grad.array(), T(0)).matrix();
    });
  }

  // Elementwise minimum; ties route the gradient to a.
  Var minimum(Var a, Var b) {
    check_same(a, b, "minimum");
    kinks_.push_back({Kink::kLessEqual, a.id, b.id, T(0), T(0)});
    return push(value(a).cwiseMin(value(b)), any(a, b), [this, a, b, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      const auto take_a = (value(a).array() <= value(b).array());
      if (needs(a)) grad_ref(a.id) += take_a.select(g.array(), T(0)).matrix();
      if (needs(b)) grad_ref(b.id) += take_a.select(T(0), g.array()).matrix();
    });
  }

  // ---- reductions and reshaping -------------------------------------------

  Var sum(Var x) {
    Mat out(1, 1);
    out(0, 0) = value(x).sum();
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      grad_ref(x.id).array() += nodes_[o].grad(0, 0);
    });
  }

  Var mean(Var x) {
    const T n = static_cast<T>(value(x).size());
    return scale(sum(x), T(1) / n);
  }

  // Sum over rows: (rows x B) -> (1 x B).
  Var col_sum(Var x) {
    Mat out = value(x).colwise().sum();
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      grad_ref(x.id).rowwise() += nodes_[o].grad.row(0);
    });
  }

  // Euclidean norm of each column: (rows x B) -> (1 x B). The subgradient at
  // a zero column is taken as zero.
  Var col_norm(Var x) {
    kinks_.push_back({Kink::kNonZeroColumn, x.id, 0, T(0), T(0)});
    Mat out = value(x).colwise().norm();
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      const Mat& n = nodes_[o].value;
      Mat& gx = grad_ref(x.id);
      for (Index c = 0; c < n.cols(); ++c) {
        if (n(0, c) > T(0)) gx.col(c) += value(x).col(c) * (g(0, c) / n(0, c));
      }
    });
  }

  Var concat_rows(std::span<const Var> parts) {
    check(!parts.empty(), "concat_rows: no inputs");
    const Index cols = value(parts[0]).cols();
    Index rows = 0;
    bool rg = false;
    for (Var p : parts) {
      check(value(p).cols() == cols, "concat_rows: column counts differ");
      rows += value(p).rows();
      rg = rg || needs(p);
    }
    Mat out(rows, cols);
    Index r = 0;
    for (Var p : parts) {
      out.middleRows(r, value(p).rows()) = value(p);
      r += value(p).rows();
    }
    std::vector<Var> ins(parts.begin(), parts.end());
    return push(std::move(out), rg, [this, ins, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      Index row = 0;
      for (Var p : ins) {
        const Index n = value(p).rows();
        if (needs(p)) grad_ref(p.id) += g.middleRows(row, n);
        row += n;
      }
    });
  }

  Var concat_rows(std::initializer_list<Var> parts) {
    return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
  }

  Var slice_rows(Var x, Index start, Index count) {
    check(start >= 0 && count >= 0 && start + count <= value(x).rows(), "slice_rows: out of range");
    Mat out = value(x).middleRows(start, count);
    return push(std::move(out), any(x), [this, x, start, count, o = next_id()] {
      grad_ref(x.id).middleRows(start, count) += nodes_[o].grad;
    });
  }

  // Column c of x becomes columns [c*times, (c+1)*times) of the result.
  Var repeat_cols(Var x, Index times) {
    const Mat& v = value(x);
    Mat out(v.rows(), v.cols() * times);
    for (Index c = 0; c < v.cols(); ++c) {
      out.middleCols(c * times, times) = v.col(c).replicate(1, times);
    }
    return push(std::move(out), any(x), [this, x, times, o = next_id()] {
      const Mat& g = nodes_[o].grad;
      Mat& gx = grad_ref(x.id);
      for (Index c = 0; c < gx.cols(); ++c) gx.col(c) += g.middleCols(c * times, times).rowwise().sum();
    });
  }

  // Column-major reinterpretation.
  Var reshape(Var x, Index rows, Index cols) {
    check(rows * cols == value(x).size(), "reshape: size mismatch");
    Mat out = Eigen::Map<const Mat>(value(x).data(), rows, cols);
    return push(std::move(out), any(x), [this, x, o = next_id()] {
      Mat& gx = grad_ref(x.id);
      gx += Eigen::Map<const Mat>(nodes_[o].grad.data(), gx.rows(), gx.cols());
    });
  }

  // Hash of the branch taken at every non-differentiable op (relu, clamp,
  // minimum, col_norm). Two forward passes with equal signatures lie on the
  // same smooth piece, so a finite difference between them is meaningful.
  std::uint64_t kink_signature() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](bool bit) {
      h ^= bit ? 0x9eULL : 0x51ULL;
      h *= 1099511628211ULL;
    };
    for (const auto& k : kinks_) {
      const Mat& a = nodes_[k.a].value;
      for (Index i = 0; i < a.size(); ++i) {
        const T v = a.data()[i];
        switch (k.kind) {
          case Kink::kPositive: mix(v > T(0)); break;
          case Kink::kInterval: mix(v < k.lo); mix(v > k.hi); break;
          case Kink::kLessEqual: mix(v <= nodes_[k.b].value.data()[i]); break;
          case Kink::kNonZeroColumn: break;
        }
      }
      if (k.kind == Kink::kNonZeroColumn) {
        for (Index c = 0; c < a.cols(); ++c) mix(a.col(c).squaredNorm() > T(0));
      }
    }
    return h;
  }

  // ---- backward -------------------------------------------------------------

  void backward(Var loss) {
    const Mat& lv = value(loss);
    if (lv.size() != 1) throw StructuralError("backward: loss must be a scalar");
    if (!std::isfinite(static_cast<double>(lv(0, 0)))) {
      throw NumericError("backward: loss is not finite (" + std::to_string(static_cast<double>(lv(0, 0))) +
                         ") after " + std::to_string(nodes_.size()) + " recorded ops");
    }
    if (!nodes_[loss.id].requires_grad) return;
    grad_ref(loss.id)(0, 0) += T(1);
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.backward && n.grad.size() != 0) n.backward();
    }
  }

  // Gradients for every entry of `set`, in declaration order. Entries the
  // loss never touched come back as exact zeros.
  Gradients<T> gradients(const ParamSet<T>& set) const {
    Gradients<T> out;
    out.reserve(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
      out.push_back(Mat::Zero(set.value(i).rows(), set.value(i).cols()));
    }
    for (const auto& leaf : params_) {
      if (leaf.set == &set && leaf.trainable && nodes_[leaf.node].grad.size() != 0) {
        out[leaf.index] += nodes_[leaf.node].grad;
      }
    }
    return out;
  }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    std::function<void()> backward;
  };
  struct ParamLeaf {
    const ParamSet<T>* set;
    std::size_t index;
    std::size_t node;
    bool trainable;
  };

  std::size_t next_id() const { return nodes_.size(); }
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  bool any(Var a) const { return needs(a); }
  bool any(Var a, Var b) const { return needs(a) || needs(b); }

  Var push(Mat value, bool requires_grad, std::function<void()> fn) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  Mat& grad_ref(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  static void check(bool ok, const char* what) {
    if (!ok) throw StructuralError(what);
  }
  void check_same(Var a, Var b, const char* op) const {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols()) {
      throw StructuralError(std::string(op) + ": shapes differ");
    }
  }

  struct Kink {
    enum Kind { kPositive, kInterval, kLessEqual, kNonZeroColumn } kind;
    std::size_t a, b;
    T lo, hi;
  };

  std::vector<Node> nodes_;
  std::vector<ParamLeaf> params_;
  std::vector<Kink> kinks_;
  mutable Mat zero_cache_;
};

}  // namespace rili::nn
