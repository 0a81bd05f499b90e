// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "xsel/params.hpp"
#include "xsel/tape.hpp"

namespace xsel {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult check_gradients(const std::function<Tensor()>& loss_fn, const NamedTensors& inputs,
                                const GradCheckOptions& opts) {
  for (const auto& [name, t] : inputs) {
    Tensor handle = t;
    handle.zero_grad();
  }
  {
    Tape tape;
    Tensor loss;
    {
      TapeScope scope(&tape);
      loss = loss_fn();
    }
    tape.backward(loss);
  }
  GradCheckResult result;
  TapeScope no_tape(nullptr);
  for (const auto& [name, t] : inputs) {
    Tensor handle = t;
    auto values = handle.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + opts.step;
      const double up = loss_fn().item();
      values[i] = saved - opts.step;
      const double down = loss_fn().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double err = relative_error(handle.grad()[i], numeric, opts.floor);
      ++result.checked;
      if (result.worst.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

NamedTensors named(const ParamStore& store, const std::string& prefix) {
  NamedTensors out;
  for (const auto& [name, t] : store) out.emplace_back(prefix + name, t);
  return out;
}

}  // namespace xsel
