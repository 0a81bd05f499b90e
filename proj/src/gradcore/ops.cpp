// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "xsel/errors.hpp"
#include "xsel/rng.hpp"
#include "xsel/tape.hpp"

namespace xsel {

namespace {

using NodePtr = std::shared_ptr<TensorNode>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

bool recording(std::initializer_list<const Tensor*> inputs) {
  if (active_tape() == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->defined() && t->requires_grad()) return true;
  }
  return false;
}

bool recording(const std::vector<Tensor>& inputs) {
  if (active_tape() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor& t) { return t.requires_grad(); });
}

void record(const Tensor& out, std::function<void()> fn) {
  active_tape()->record({out.node()}, std::move(fn));
}

bool wants_grad(const NodePtr& n) { return n->requires_grad; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!b.defined() || a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         (b.defined() ? shape_str(b.shape()) : std::string("<none>")));
  }
}

void require_rank(const Tensor& a, std::size_t rank, const char* op) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(a.shape()));
  }
}

Tensor binary(ElementOp op, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "elementwise");
  const std::size_t n = a.numel();
  std::vector<double> out(n);
  auto x = a.data();
  auto y = b.data();
  switch (op) {
    case ElementOp::kAdd:
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
      break;
    case ElementOp::kSub:
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
      break;
    case ElementOp::kMul:
      for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
      break;
    default:
      throw ParameterError("not a binary op");
  }
  const bool rec = recording({&a, &b});
  Tensor result(a.shape(), std::move(out), rec);
  if (rec) {
    NodePtr an = a.node(), bn = b.node(), on = result.node();
    record(result, [op, an, bn, on] {
      const std::size_t n = on->value.size();
      const auto& g = on->grad;
      if (wants_grad(an)) {
        for (std::size_t i = 0; i < n; ++i) {
          an->grad[i] += op == ElementOp::kMul ? g[i] * bn->value[i] : g[i];
        }
      }
      if (wants_grad(bn)) {
        for (std::size_t i = 0; i < n; ++i) {
          if (op == ElementOp::kAdd) {
            bn->grad[i] += g[i];
          } else if (op == ElementOp::kSub) {
            bn->grad[i] -= g[i];
          } else {
            bn->grad[i] += g[i] * an->value[i];
          }
        }
      }
    });
  }
  return result;
}

Tensor unary(ElementOp op, const Tensor& a) {
  const std::size_t n = a.numel();
  std::vector<double> out(n);
  auto x = a.data();
  switch (op) {
    case ElementOp::kTanh:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(x[i]);
      break;
    case ElementOp::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
      break;
    case ElementOp::kExp:
      for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]);
      break;
    case ElementOp::kLog:
      for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0)) throw DomainError("log of nonpositive value " + std::to_string(x[i]));
        out[i] = std::log(x[i]);
      }
      break;
    default:
      throw ParameterError("not a unary op");
  }
  const bool rec = recording({&a});
  Tensor result(a.shape(), std::move(out), rec);
  if (rec) {
    NodePtr an = a.node(), on = result.node();
    record(result, [op, an, on] {
      const std::size_t n = on->value.size();
      const auto& g = on->grad;
      const auto& y = on->value;
      for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        switch (op) {
          case ElementOp::kTanh: d = 1.0 - y[i] * y[i]; break;
          case ElementOp::kSigmoid: d = y[i] * (1.0 - y[i]); break;
          case ElementOp::kExp: d = y[i]; break;
          default: d = 1.0 / an->value[i]; break;
        }
        an->grad[i] += g[i] * d;
      }
    });
  }
  return result;
}

// Builds `out` (a new tensor of `shape`) whose entry j is x[index[j]], with the
// matching scatter-add backward.
Tensor index_select(const Tensor& x, Shape shape, std::vector<std::size_t> index) {
  std::vector<double> out(index.size());
  auto v = x.data();
  for (std::size_t j = 0; j < index.size(); ++j) out[j] = v[index[j]];
  const bool rec = recording({&x});
  Tensor result(std::move(shape), std::move(out), rec);
  if (rec) {
    NodePtr xn = x.node(), on = result.node();
    record(result, [xn, on, index = std::move(index)] {
      for (std::size_t j = 0; j < index.size(); ++j) xn->grad[index[j]] += on->grad[j];
    });
  }
  return result;
}

}  // namespace

Tensor elementwise(ElementOp op, const Tensor& a, const Tensor& b) {
  switch (op) {
    case ElementOp::kAdd:
    case ElementOp::kSub:
    case ElementOp::kMul:
      return binary(op, a, b);
    default:
      return unary(op, a);
  }
}

Tensor add(const Tensor& a, const Tensor& b) { return binary(ElementOp::kAdd, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(ElementOp::kSub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(ElementOp::kMul, a, b); }
Tensor tanh(const Tensor& a) { return unary(ElementOp::kTanh, a); }
Tensor sigmoid(const Tensor& a) { return unary(ElementOp::kSigmoid, a); }
Tensor exp(const Tensor& a) { return unary(ElementOp::kExp, a); }
Tensor log(const Tensor& a) { return unary(ElementOp::kLog, a); }

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= s;
  const bool rec = recording({&a});
  Tensor result(a.shape(), std::move(out), rec);
  if (rec) {
    NodePtr an = a.node(), on = result.node();
    record(result, [an, on, s] {
      for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += s * on->grad[i];
    });
  }
  return result;
}

Tensor shift(const Tensor& a, double s) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v += s;
  const bool rec = recording({&a});
  Tensor result(a.shape(), std::move(out), rec);
  if (rec) {
    NodePtr an = a.node(), on = result.node();
    record(result, [an, on] {
      for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
    });
  }
  return result;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  if (b.rank() != 1 && b.rank() != 2) {
    throw DimensionError("matmul: right operand must be a vector or matrix, got " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1);
  const std::size_t n = b.rank() == 2 ? b.dim(1) : 1;
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner extents disagree " + shape_str(a.shape()) + " . " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(m * n);
  MatMap(out.data(), m, n).noalias() =
      ConstMatMap(a.data().data(), m, k) * ConstMatMap(b.data().data(), k, n);
  const bool rec = recording({&a, &b});
  Shape shape = b.rank() == 2 ? Shape{m, n} : Shape{m};
  Tensor result(std::move(shape), std::move(out), rec);
  if (rec) {
    NodePtr an = a.node(), bn = b.node(), on = result.node();
    record(result, [an, bn, on, m, k, n] {
      ConstMatMap g(on->grad.data(), m, n);
      if (wants_grad(an)) {
        MatMap(an->grad.data(), m, k).noalias() += g * ConstMatMap(bn->value.data(), k, n).transpose();
      }
      if (wants_grad(bn)) {
        MatMap(bn->grad.data(), k, n).noalias() += ConstMatMap(an->value.data(), m, k).transpose() * g;
      }
    });
  }
  return result;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.dim(0), c = a.dim(1);
  std::vector<std::size_t> index(r * c);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < r; ++j) index[i * r + j] = j * c + i;
  }
  return index_select(a, {c, r}, std::move(index));
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: " + shape_str(a.shape()) + " -> " + shape_str(shape));
  }
  const bool rec = recording({&a});
  Tensor result(std::move(shape), std::vector<double>(a.data().begin(), a.data().end()), rec);
  if (rec) {
    NodePtr an = a.node(), on = result.node();
    record(result, [an, on] {
      for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
    });
  }
  return result;
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  const bool rec = recording({&a});
  Tensor result = Tensor::scalar(s, rec);
  if (rec) {
    NodePtr an = a.node(), on = result.node();
    record(result, [an, on] {
      const double g = on->grad[0];
      for (double& d : an->grad) d += g;
    });
  }
  return result;
}

Tensor mean(const std::vector<Tensor>& scalars) {
  if (scalars.empty()) throw EmptySequenceError("mean of no values");
  double s = 0.0;
  for (const Tensor& t : scalars) s += t.item();
  const double inv = 1.0 / static_cast<double>(scalars.size());
  const bool rec = recording(scalars);
  Tensor result = Tensor::scalar(s * inv, rec);
  if (rec) {
    std::vector<NodePtr> ins;
    for (const Tensor& t : scalars) ins.push_back(t.node());
    NodePtr on = result.node();
    record(result, [ins, on, inv] {
      for (const NodePtr& n : ins) {
        if (wants_grad(n)) n->grad[0] += on->grad[0] * inv;
      }
    });
  }
  return result;
}

Tensor element(const Tensor& v, std::size_t i) {
  if (i >= v.numel()) throw BoundsError("element index " + std::to_string(i) + " out of range");
  return index_select(v, {}, {i});
}

Tensor gather(const Tensor& v, const std::vector<std::size_t>& indices) {
  for (std::size_t i : indices) {
    if (i >= v.numel()) throw BoundsError("gather index " + std::to_string(i) + " out of range");
  }
  if (indices.empty()) throw EmptySequenceError("gather with no indices");
  return index_select(v, {indices.size()}, indices);
}

Tensor softmax_masked(const Tensor& scores, const std::vector<bool>& mask) {
  if (scores.rank() != 1 && scores.rank() != 2) {
    throw DimensionError("softmax_masked expects a vector or matrix, got " +
                         shape_str(scores.shape()));
  }
  if (mask.size() != scores.numel()) {
    throw DimensionError("softmax_masked: mask length " + std::to_string(mask.size()) +
                         " vs " + std::to_string(scores.numel()) + " scores");
  }
  const std::size_t rows = scores.rank() == 2 ? scores.dim(0) : 1;
  const std::size_t cols = scores.rank() == 2 ? scores.dim(1) : scores.dim(0);
  auto x = scores.data();
  std::vector<double> out(scores.numel(), 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t off = r * cols;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask[off + c]) mx = std::max(mx, x[off + c]);
    }
    if (mx == -std::numeric_limits<double>::infinity()) {
      throw EmptySupportError("softmax_masked: every position is masked");
    }
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (mask[off + c]) z += (out[off + c] = std::exp(x[off + c] - mx));
    }
    for (std::size_t c = 0; c < cols; ++c) out[off + c] /= z;
  }
  const bool rec = recording({&scores});
  Tensor result(scores.shape(), std::move(out), rec);
  if (rec) {
    NodePtr sn = scores.node(), on = result.node();
    record(result, [sn, on, rows, cols] {
      const auto& y = on->value;
      const auto& g = on->grad;
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t off = r * cols;
        double dot = 0.0;
        for (std::size_t c = 0; c < cols; ++c) dot += y[off + c] * g[off + c];
        for (std::size_t c = 0; c < cols; ++c) sn->grad[off + c] += y[off + c] * (g[off + c] - dot);
      }
    });
  }
  return result;
}

Tensor softmax(const Tensor& scores) {
  return softmax_masked(scores, std::vector<bool>(scores.numel(), true));
}

Tensor logsumexp_masked(const Tensor& x, const std::vector<bool>& mask) {
  require_rank(x, 1, "logsumexp_masked");
  if (mask.size() != x.numel()) throw DimensionError("logsumexp_masked: mask length mismatch");
  auto v = x.data();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) mx = std::max(mx, v[i]);
  }
  if (mx == -std::numeric_limits<double>::infinity()) {
    throw EmptySupportError("logsumexp_masked: every position is masked");
  }
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) z += std::exp(v[i] - mx);
  }
  const double lse = mx + std::log(z);
  const bool rec = recording({&x});
  Tensor result = Tensor::scalar(lse, rec);
  if (rec) {
    NodePtr xn = x.node(), on = result.node();
    record(result, [xn, on, mask, lse] {
      const double g = on->grad[0];
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) xn->grad[i] += g * std::exp(xn->value[i] - lse);
      }
    });
  }
  return result;
}

Tensor logsumexp(const Tensor& x) { return logsumexp_masked(x, std::vector<bool>(x.numel(), true)); }

Tensor log_softmax(const Tensor& x) {
  require_rank(x, 1, "log_softmax");
  const double lse = logsumexp(x.detach()).item();
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v -= lse;
  const bool rec = recording({&x});
  Tensor result(x.shape(), std::move(out), rec);
  if (rec) {
    NodePtr xn = x.node(), on = result.node();
    record(result, [xn, on] {
      double total = 0.0;
      for (double g : on->grad) total += g;
      for (std::size_t i = 0; i < on->grad.size(); ++i) {
        xn->grad[i] += on->grad[i] - std::exp(on->value[i]) * total;
      }
    });
  }
  return result;
}

Tensor max_pool_time(const Tensor& x) {
  require_rank(x, 2, "max_pool_time");
  const std::size_t d = x.dim(0), len = x.dim(1);
  if (len == 0) throw EmptySequenceError("max_pool_time over an empty sequence");
  std::vector<std::size_t> index(d);
  auto v = x.data();
  for (std::size_t r = 0; r < d; ++r) {
    std::size_t best = r * len;
    for (std::size_t c = 1; c < len; ++c) {
      if (v[r * len + c] > v[best]) best = r * len + c;
    }
    index[r] = best;
  }
  return index_select(x, {d}, std::move(index));
}

Tensor column(const Tensor& x, std::size_t c) {
  require_rank(x, 2, "column");
  if (c >= x.dim(1)) throw BoundsError("column " + std::to_string(c) + " out of range");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  std::vector<std::size_t> index(rows);
  for (std::size_t r = 0; r < rows; ++r) index[r] = r * cols + c;
  return index_select(x, {rows}, std::move(index));
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_cols");
  if (begin >= end || end > x.dim(1)) {
    throw BoundsError("slice_cols [" + std::to_string(begin) + ", " + std::to_string(end) +
                      ") out of range for " + shape_str(x.shape()));
  }
  std::vector<std::size_t> cols(end - begin);
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = begin + i;
  return gather_cols(x, cols);
}

Tensor gather_cols(const Tensor& x, const std::vector<std::size_t>& indices) {
  require_rank(x, 2, "gather_cols");
  if (indices.empty()) throw EmptySequenceError("gather_cols with no indices");
  const std::size_t rows = x.dim(0), cols = x.dim(1), n = indices.size();
  std::vector<std::size_t> index(rows * n);
  for (std::size_t j = 0; j < n; ++j) {
    if (indices[j] >= cols) throw BoundsError("gather_cols index out of range");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) index[r * n + j] = r * cols + indices[j];
  }
  return index_select(x, {rows, n}, std::move(index));
}

Tensor stack_columns(const std::vector<Tensor>& cols) {
  if (cols.empty()) throw EmptySequenceError("stack_columns of no columns");
  const std::size_t d = cols[0].numel();
  const std::size_t n = cols.size();
  std::vector<double> out(d * n);
  for (std::size_t j = 0; j < n; ++j) {
    if (cols[j].rank() != 1 || cols[j].numel() != d) {
      throw DimensionError("stack_columns: column " + std::to_string(j) + " has shape " +
                           shape_str(cols[j].shape()));
    }
    auto v = cols[j].data();
    for (std::size_t r = 0; r < d; ++r) out[r * n + j] = v[r];
  }
  const bool rec = recording(cols);
  Tensor result({d, n}, std::move(out), rec);
  if (rec) {
    std::vector<NodePtr> ins;
    for (const Tensor& t : cols) ins.push_back(t.node());
    NodePtr on = result.node();
    record(result, [ins, on, d, n] {
      for (std::size_t j = 0; j < n; ++j) {
        if (!wants_grad(ins[j])) continue;
        for (std::size_t r = 0; r < d; ++r) ins[j]->grad[r] += on->grad[r * n + j];
      }
    });
  }
  return result;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw EmptySequenceError("concat_rows of nothing");
  const std::size_t rank = parts[0].rank();
  if (rank != 1 && rank != 2) throw DimensionError("concat_rows expects vectors or matrices");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != rank || p.cols() != cols) {
      throw DimensionError("concat_rows: incompatible part " + shape_str(p.shape()));
    }
    rows += p.rows();
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const Tensor& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  const bool rec = recording(parts);
  Shape shape = rank == 1 ? Shape{rows} : Shape{rows, cols};
  Tensor result(std::move(shape), std::move(out), rec);
  if (rec) {
    std::vector<NodePtr> ins;
    for (const Tensor& t : parts) ins.push_back(t.node());
    NodePtr on = result.node();
    record(result, [ins, on] {
      std::size_t off = 0;
      for (const NodePtr& n : ins) {
        const std::size_t len = n->value.size();
        if (wants_grad(n)) {
          for (std::size_t i = 0; i < len; ++i) n->grad[i] += on->grad[off + i];
        }
        off += len;
      }
    });
  }
  return result;
}

Tensor broadcast_cols(const Tensor& v, std::size_t n) {
  require_rank(v, 1, "broadcast_cols");
  const std::size_t d = v.dim(0);
  std::vector<std::size_t> index(d * n);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < n; ++c) index[r * n + c] = r;
  }
  return index_select(v, {d, n}, std::move(index));
}

Tensor embedding(const Tensor& table, const std::vector<std::size_t>& ids) {
  require_rank(table, 2, "embedding");
  if (ids.empty()) throw EmptySequenceError("embedding lookup of an empty sequence");
  const std::size_t vocab = table.dim(0), d = table.dim(1), len = ids.size();
  std::vector<std::size_t> index(d * len);
  for (std::size_t t = 0; t < len; ++t) {
    if (ids[t] >= vocab) {
      throw BoundsError("embedding id " + std::to_string(ids[t]) + " >= table size " +
                        std::to_string(vocab));
    }
    for (std::size_t r = 0; r < d; ++r) index[r * len + t] = ids[t] * d + r;
  }
  return index_select(table, {d, len}, std::move(index));
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ParameterError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.numel());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * mask[i];
  const bool rec = recording({&x});
  Tensor result(x.shape(), std::move(out), rec);
  if (rec) {
    NodePtr xn = x.node(), on = result.node();
    record(result, [xn, on, mask = std::move(mask)] {
      for (std::size_t i = 0; i < mask.size(); ++i) xn->grad[i] += on->grad[i] * mask[i];
    });
  }
  return result;
}

}  // namespace xsel
