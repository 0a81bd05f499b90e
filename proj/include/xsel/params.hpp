// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "xsel/tensor.hpp"

namespace xsel {

class Rng;

/// Named trainable tensors in deterministic (lexicographic) order.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

  void zero_grad();
  std::size_t total_size() const;

  auto begin() { return tensors_.begin(); }
  auto end() { return tensors_.end(); }
  auto begin() const { return tensors_.begin(); }
  auto end() const { return tensors_.end(); }
  std::size_t size() const { return tensors_.size(); }

  /// {"name": {"shape": [...], "data": [...]}, ...}
  nlohmann::json to_json() const;
  /// Overwrites values of existing tensors; names and shapes must match.
  void load_json(const nlohmann::json& j);
  /// Copies values from another store with identical layout.
  void copy_values_from(const ParamStore& other);

 private:
  std::map<std::string, Tensor> tensors_;
};

/// U(-scale, scale) tensor flagged as trainable.
Tensor uniform_param(Shape shape, double scale, Rng& rng);
/// Xavier-uniform [rows x cols] trainable matrix.
Tensor xavier_param(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace xsel
