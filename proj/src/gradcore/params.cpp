// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/params.hpp"

#include <cmath>

#include "xsel/errors.hpp"
#include "xsel/rng.hpp"

namespace xsel {

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  if (contains(name)) throw ParameterError("duplicate parameter " + name);
  t.set_requires_grad(true);
  return tensors_.emplace(name, std::move(t)).first->second;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ParameterError("unknown parameter " + name);
  return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ParameterError("unknown parameter " + name);
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : tensors_) t.zero_grad();
}

std::size_t ParamStore::total_size() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.numel();
  return n;
}

nlohmann::json ParamStore::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, t] : tensors_) {
    j[name] = {{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
  }
  return j;
}

void ParamStore::load_json(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != tensors_.size()) {
    throw SchemaError("parameter set does not match the model layout");
  }
  for (auto& [name, t] : tensors_) {
    if (!j.contains(name)) throw SchemaError("checkpoint lacks parameter " + name);
    const auto& entry = j.at(name);
    if (entry.at("shape").get<Shape>() != t.shape()) {
      throw SchemaError("shape mismatch for parameter " + name);
    }
    auto data = entry.at("data").get<std::vector<double>>();
    if (data.size() != t.numel()) throw SchemaError("data length mismatch for parameter " + name);
    std::copy(data.begin(), data.end(), t.mutable_data().begin());
  }
}

void ParamStore::copy_values_from(const ParamStore& other) {
  for (auto& [name, t] : tensors_) {
    const Tensor& src = other.get(name);
    if (src.shape() != t.shape()) throw DimensionError("copy_values_from: shape mismatch " + name);
    std::copy(src.data().begin(), src.data().end(), t.mutable_data().begin());
  }
}

Tensor uniform_param(Shape shape, double scale, Rng& rng) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.uniform(-scale, scale);
  return Tensor(std::move(shape), std::move(v), true);
}

Tensor xavier_param(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform_param({rows, cols}, bound, rng);
}

}  // namespace xsel
