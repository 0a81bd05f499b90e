// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/optim.hpp"

#include <cmath>

#include "xsel/errors.hpp"
#include "xsel/params.hpp"

namespace xsel {

void RmsProp::step(ParamStore& params, const std::string& tag) {
  for (auto& [name, t] : params) {
    if (!t.requires_grad()) continue;
    auto& acc = accumulators[tag + "/" + name];
    if (acc.empty()) acc.assign(t.numel(), 0.0);
    auto g = t.grad();
    auto p = t.mutable_data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc[i] = rho * acc[i] + (1.0 - rho) * g[i] * g[i];
      p[i] -= lr * g[i] / std::sqrt(acc[i] + eps);
    }
  }
}

nlohmann::json RmsProp::to_json() const {
  return {{"lr", lr}, {"rho", rho}, {"eps", eps}, {"accumulators", accumulators}};
}

RmsProp RmsProp::from_json(const nlohmann::json& j) {
  RmsProp r;
  try {
    r.lr = j.at("lr").get<double>();
    r.rho = j.at("rho").get<double>();
    r.eps = j.at("eps").get<double>();
    r.accumulators = j.at("accumulators").get<std::map<std::string, std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("optimizer state: ") + e.what());
  }
  return r;
}

}  // namespace xsel
