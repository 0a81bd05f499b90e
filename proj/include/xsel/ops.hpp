// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "xsel/tensor.hpp"

namespace xsel {

class Rng;

// Differentiable primitives. Each op records its backward rule on the active
// tape when a tape is active and at least one input requires a gradient.
// Otherwise the result is a plain constant.

enum class ElementOp { kAdd, kSub, kMul, kTanh, kSigmoid, kExp, kLog };

/// Dispatches one elementwise op. Binary ops need `b` with the same shape as
/// `a`; unary ops ignore it.
Tensor elementwise(ElementOp op, const Tensor& a, const Tensor& b = Tensor());

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor exp(const Tensor& a);
/// Throws DomainError on any nonpositive entry.
Tensor log(const Tensor& a);

Tensor scale(const Tensor& a, double s);
/// a + s elementwise.
Tensor shift(const Tensor& a, double s);

/// [m x k] . [k x n] -> [m x n]; a rank-1 right operand is a column and gives
/// a rank-1 result.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

/// Sum of all entries as a scalar.
Tensor sum(const Tensor& a);
Tensor mean(const std::vector<Tensor>& scalars);
/// Entry i of a vector as a scalar.
Tensor element(const Tensor& v, std::size_t i);
/// Vector of the selected entries of a vector.
Tensor gather(const Tensor& v, const std::vector<std::size_t>& indices);

/// Softmax over the entries where `mask` is true; masked entries are exactly
/// zero. A matrix is normalized row by row with a row-major mask. Throws
/// EmptySupportError when a vector (or any matrix row) is fully masked.
Tensor softmax_masked(const Tensor& scores, const std::vector<bool>& mask);
Tensor softmax(const Tensor& scores);
/// log(sum(exp(x))) over the unmasked entries of a vector, as a scalar.
Tensor logsumexp_masked(const Tensor& x, const std::vector<bool>& mask);
Tensor logsumexp(const Tensor& x);
Tensor log_softmax(const Tensor& x);

/// Per-row maximum over the columns of [d x L]. Backward routes to the first
/// argmax of each row. Throws EmptySequenceError when L = 0.
Tensor max_pool_time(const Tensor& x);

Tensor column(const Tensor& x, std::size_t c);
/// Columns [begin, end) of a matrix.
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
/// Matrix whose j-th column is column indices[j] of x.
Tensor gather_cols(const Tensor& x, const std::vector<std::size_t>& indices);
/// Matrix with the given vectors as columns.
Tensor stack_columns(const std::vector<Tensor>& cols);
/// Vertical concatenation of matrices with equal column counts, or of vectors.
Tensor concat_rows(const std::vector<Tensor>& parts);
/// [d] -> [d x n] with every column equal to v.
Tensor broadcast_cols(const Tensor& v, std::size_t n);
/// Rows of `table` [V x d] as the columns of a [d x L] matrix.
Tensor embedding(const Tensor& table, const std::vector<std::size_t>& ids);

/// Inverted dropout: survivors are scaled by 1 / (1 - rate). Identity when
/// `training` is false or rate is 0. Throws ParameterError unless
/// 0 <= rate < 1.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

}  // namespace xsel
