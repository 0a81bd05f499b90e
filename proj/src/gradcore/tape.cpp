// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/tape.hpp"

#include <algorithm>

#include "xsel/errors.hpp"

namespace xsel {

namespace {
thread_local Tape* g_active_tape = nullptr;
}  // namespace

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape* tape) : previous_(g_active_tape) { g_active_tape = tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

void Tape::record(std::vector<std::shared_ptr<TensorNode>> outputs,
                  std::function<void()> backward_fn) {
  entries_.push_back({std::move(outputs), std::move(backward_fn)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw RankError("backward() needs a scalar loss, got shape " +
                    (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;
  for (auto& e : entries_) {
    for (auto& out : e.outputs) std::fill(out->grad.begin(), out->grad.end(), 0.0);
  }
  loss.node()->grad[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward_fn();
}

}  // namespace xsel
