// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/errors.hpp"
#include "xsel/extraction.hpp"
#include "xsel/ops.hpp"
#include "xsel/rng.hpp"

namespace xsel {

ExtractionModel::ExtractionModel(const ModelDims& dims, std::size_t vocab_size, Rng& rng)
    : dims_(dims) {
  const std::size_t h2 = 2 * dims.d_h;
  embedding_ = params_.add("ext.embedding", uniform_param({vocab_size, dims.d_w}, 0.1, rng));
  encoder_ = BiLstm::make(params_, "ext.encoder", dims.d_w, dims.d_h, rng);
  fusion_ = BiLstm::make(params_, "ext.fusion", 2 * h2, dims.d_h, rng);
  w_begin_ = params_.add("ext.w_begin", xavier_param(1, h2, rng));
  w_end_ = params_.add("ext.w_end", xavier_param(1, h2, rng));
}

ExtractionModel::Encoding ExtractionModel::encode(const std::vector<std::size_t>& question,
                                                  const std::vector<std::size_t>& passage,
                                                  const ForwardMode& mode) const {
  if (question.empty() || passage.empty()) {
    throw InputError("extraction needs a non-empty question and passage");
  }
  auto embed = [&](const std::vector<std::size_t>& ids) {
    Tensor x = embedding(embedding_, ids);
    return mode.training ? dropout(x, mode.dropout, true, *mode.rng) : x;
  };
  Encoding enc;
  enc.h_q = encoder_(embed(question));
  enc.h_p = encoder_(embed(passage));
  // alpha[t, k] = softmax_k(h_q^k . h_p^t)
  enc.alpha = softmax(matmul(transpose(enc.h_p), enc.h_q));
  enc.h_tilde = matmul(enc.h_q, transpose(enc.alpha));
  enc.g = fusion_(concat_rows({enc.h_p, enc.h_tilde}));
  return enc;
}

std::pair<Tensor, Tensor> ExtractionModel::boundary_scores(const Tensor& g) const {
  const std::size_t len = g.dim(1);
  return {reshape(matmul(w_begin_, g), {len}), reshape(matmul(w_end_, g), {len})};
}

SpanDistribution ExtractionModel::span_distribution(const Tensor& g, std::size_t max_len,
                                                    std::size_t passage) const {
  if (!g.defined() || g.rank() != 2) throw InputError("span_distribution needs an encoded passage");
  auto [b, e] = boundary_scores(g);
  return span_distribution_from_scores(b, e, max_len, passage);
}

std::vector<SpanDistribution> ExtractionModel::distributions(const EncodedExample& ex,
                                                             std::size_t max_len,
                                                             const ForwardMode& mode) const {
  std::vector<SpanDistribution> out;
  out.reserve(ex.passages.size());
  for (std::size_t i = 0; i < ex.passages.size(); ++i) {
    out.push_back(span_distribution(encode_passage(ex.question, ex.passages[i], mode), max_len, i));
  }
  return out;
}

std::optional<Tensor> mle_extract_loss(const EncodedExample& ex, const ExtractionModel& model,
                                       std::size_t max_len, const ForwardMode& mode) {
  const auto answers = ex.source->answer_tokens();
  std::vector<Tensor> terms;
  for (std::size_t i = 0; i < ex.passages.size(); ++i) {
    const auto gold = find_answer_spans(ex.source->passages[i], answers, max_len);
    if (gold.empty()) continue;
    const SpanDistribution dist =
        model.span_distribution(model.encode_passage(ex.question, ex.passages[i], mode), max_len, i);
    for (const auto& [b, e] : gold) {
      terms.push_back(scale(element(dist.log_probs, *dist.find(b, e)), -1.0));
    }
  }
  if (terms.empty()) return std::nullopt;
  return mean(terms);
}

}  // namespace xsel
