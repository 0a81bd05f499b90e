// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/errors.hpp"
#include "xsel/model.hpp"

namespace xsel {

nlohmann::json ModelDims::to_json() const {
  return {{"d_w", d_w},
          {"d_h", d_h},
          {"d_c", d_c},
          {"common_dim", common_dim},
          {"distance_dim", distance_dim},
          {"distance_clip", distance_clip}};
}

ModelDims ModelDims::from_json(const nlohmann::json& j) {
  ModelDims d;
  try {
    d.d_w = j.at("d_w").get<std::size_t>();
    d.d_h = j.at("d_h").get<std::size_t>();
    d.d_c = j.at("d_c").get<std::size_t>();
    d.common_dim = j.at("common_dim").get<std::size_t>();
    d.distance_dim = j.at("distance_dim").get<std::size_t>();
    d.distance_clip = j.at("distance_clip").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model dims: ") + e.what());
  }
  return d;
}

EncodedExample encode_example(const Example& ex, const Vocab& vocab) {
  EncodedExample out;
  out.source = &ex;
  out.question = vocab.ids(ex.question);
  for (const auto& p : ex.passages) out.passages.push_back(vocab.ids(p));
  return out;
}

}  // namespace xsel
