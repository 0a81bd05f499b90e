// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "xsel/tensor.hpp"

namespace xsel {

/// Ordered record of primitive operations. Entries are appended in execution
/// order, which is a topological order of the computation graph, so a single
/// reverse sweep visits every operation once after all of its consumers.
class Tape {
 public:
  void record(std::vector<std::shared_ptr<TensorNode>> outputs,
              std::function<void()> backward_fn);

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape backwards. Gradients of
  /// recorded intermediates are reset first; leaf gradients accumulate.
  void backward(const Tensor& loss);

  void clear() { entries_.clear(); }
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    std::vector<std::shared_ptr<TensorNode>> outputs;
    std::function<void()> backward_fn;
  };
  std::vector<Entry> entries_;
};

/// Tape that receives operations issued on the current thread, or nullptr.
Tape* active_tape();

/// Makes `tape` the active tape of the current thread for its lifetime.
/// Passing nullptr disables recording (inference mode).
class TapeScope {
 public:
  explicit TapeScope(Tape* tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

}  // namespace xsel
