// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <map>

#include "xsel/data.hpp"
#include "xsel/errors.hpp"

namespace xsel {

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(std::vector<std::string> tokens) {
  tokens_ = {"<pad>", "<unk>"};
  index_.emplace(tokens_[0], kPad);
  index_.emplace(tokens_[1], kUnk);
  for (auto& t : tokens) {
    if (index_.count(t)) throw SchemaError("duplicate vocabulary token '" + t + "'");
    index_.emplace(t, tokens_.size());
    tokens_.push_back(std::move(t));
  }
}

std::size_t Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::size_t> Vocab::ids(const Tokens& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

nlohmann::json Vocab::to_json() const {
  return std::vector<std::string>(tokens_.begin() + 2, tokens_.end());
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  try {
    return Vocab(j.get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("vocabulary: ") + e.what());
  }
}

Vocab build_vocab(const std::vector<Example>& examples, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : examples) {
    for (const auto& t : ex.question) ++counts[t];
    for (const auto& p : ex.passages) {
      for (const auto& t : p) ++counts[t];
    }
  }
  std::vector<std::string> kept;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count && tok != "<pad>" && tok != "<unk>") kept.push_back(tok);
  }
  return Vocab(std::move(kept));
}

}  // namespace xsel
