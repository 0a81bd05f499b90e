// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace xsel {

class ParamStore;

/// RMSProp: acc <- rho * acc + (1 - rho) * g^2; p <- p - lr * g / sqrt(acc + eps).
struct RmsProp {
  double lr = 2e-3;
  double rho = 0.9;
  double eps = 1e-8;
  /// Mean-square accumulators keyed by "<store tag>/<param name>".
  std::map<std::string, std::vector<double>> accumulators;

  /// Applies one update to every parameter of `params` that has a gradient.
  /// `tag` keeps accumulators of different stores apart.
  void step(ParamStore& params, const std::string& tag = "");

  nlohmann::json to_json() const;
  static RmsProp from_json(const nlohmann::json& j);
};

}  // namespace xsel
