// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xsel/data.hpp"

namespace xsel {

class Rng;

/// Network widths shared by both stages. Defaults follow the reference
/// configuration: 100 hidden units per LSTM direction, 100-wide linear maps,
/// 4-wide common-word and 50-wide distance embeddings.
struct ModelDims {
  std::size_t d_w = 64;
  std::size_t d_h = 100;
  std::size_t d_c = 100;
  std::size_t common_dim = 4;
  std::size_t distance_dim = 50;
  std::size_t distance_clip = 20;

  nlohmann::json to_json() const;
  static ModelDims from_json(const nlohmann::json& j);
};

/// Training-time switches for one forward pass. Dropout is only applied when
/// `training` is set, and then needs `rng`.
struct ForwardMode {
  bool training = false;
  double dropout = 0.0;
  Rng* rng = nullptr;
};

/// An example mapped to vocabulary ids, keeping the raw tokens for scoring.
struct EncodedExample {
  const Example* source = nullptr;
  std::vector<std::size_t> question;
  std::vector<std::vector<std::size_t>> passages;
};

EncodedExample encode_example(const Example& ex, const Vocab& vocab);

}  // namespace xsel
