// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "xsel/tensor.hpp"

namespace xsel {

class ParamStore;

struct GradCheckOptions {
  double step = 1e-5;
  /// Denominator floor of the relative error, so that entries whose true
  /// gradient is ~0 are compared on an absolute scale.
  double floor = 1e-3;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<name>[<index>]"
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

/// Compares the taped gradient of `loss_fn` against central differences for
/// every entry of every tensor in `inputs`. `loss_fn` must be deterministic.
GradCheckResult check_gradients(const std::function<Tensor()>& loss_fn, const NamedTensors& inputs,
                                const GradCheckOptions& opts = {});

NamedTensors named(const ParamStore& store, const std::string& prefix = "");

}  // namespace xsel
