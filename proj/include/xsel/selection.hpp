// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xsel/extraction.hpp"
#include "xsel/lstm.hpp"
#include "xsel/model.hpp"
#include "xsel/params.hpp"

namespace xsel {

/// Input features of the selection model that can be switched off for
/// ablations. A disabled feature is replaced by zeros of the same shape, so
/// parameter shapes do not depend on the toggles.
struct SelectionFeatures {
  bool question_representation = true;
  bool common_words = true;
  bool candidate_representation = true;
  bool distance = true;
  bool candidate_dependent_passage = true;
  bool fused_representation = true;

  static constexpr std::array<std::string_view, 6> kNames = {
      "question_representation",    "common_words", "candidate_representation", "distance",
      "candidate_dependent_passage", "fused_representation"};

  bool& flag(std::string_view name);
  bool flag(std::string_view name) const;
  std::vector<std::string> disabled() const;
  /// All features on except `names`. Throws ConfigError on an unknown name.
  static SelectionFeatures without(const std::vector<std::string>& names);
};

/// Correlation matrix V, its row-normalized attention A (zero diagonal) and
/// the fused vector of every candidate.
struct FusionResult {
  Tensor v;          // [M x M]
  Tensor attention;  // [M x M]
  std::vector<Tensor> fused;
};

struct SelectionOutput {
  Tensor scores;     // [M]
  Tensor log_probs;  // [M]
  FusionResult fusion;

  std::vector<double> probs() const;
};

/// 1 where the passage token occurs anywhere in the question.
std::vector<bool> common_word_flags(const Tokens& passage, const Tokens& question);

/// Signed distance from position t to the span: 0 inside, negative before.
long signed_distance(std::size_t t, const Span& span);
/// Distance clipped to [-clip, clip] and shifted to [0, 2 clip].
std::size_t distance_bucket(std::size_t t, const Span& span, std::size_t clip);

Tokens span_tokens(const Example& ex, const Span& span);

/// Answer selection network over a candidate set.
class SelectionModel {
 public:
  SelectionModel(const ModelDims& dims, std::size_t vocab_size, Rng& rng,
                 SelectionFeatures features = {});
  SelectionModel(const SelectionModel&) = delete;
  SelectionModel& operator=(const SelectionModel&) = delete;

  const ModelDims& dims() const { return dims_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  SelectionFeatures& features() { return features_; }
  const SelectionFeatures& features() const { return features_; }

  /// Max over positions of the question BiLSTM states. [2h]
  Tensor question_condensed(const std::vector<std::size_t>& question, const ForwardMode& mode = {}) const;
  /// BiLSTM over [word embedding; common-word embedding; r_q]. [2h x l_p]
  Tensor passage_base_rep(const std::vector<std::size_t>& passage, const std::vector<bool>& common,
                          const Tensor& r_q, const ForwardMode& mode = {}) const;
  /// Columns of S_P covered by the span.
  Tensor candidate_context(const Tensor& s_p, const Span& span) const;
  /// tanh(W_b s^begin + W_e s^end). [d_c]
  Tensor candidate_rep(const Tensor& s_p, const Span& span) const;
  FusionResult fuse_candidates(const std::vector<Tensor>& reps) const;
  /// Passage re-encoded with candidate-aware features. [2h x l_p]
  Tensor advanced_passage_rep(const Tensor& s_p, const Span& span, const Tensor& r_c,
                              const Tensor& fused) const;
  /// w_z . maxpool(F_P) as a scalar.
  Tensor candidate_score(const Tensor& f_p) const;

  /// Scores every candidate of the set. Candidates refer to passages of `ex`.
  SelectionOutput forward(const EncodedExample& ex, const std::vector<Span>& candidates,
                          const ForwardMode& mode = {}) const;

 private:
  ModelDims dims_;
  SelectionFeatures features_;
  ParamStore params_;
  Tensor embedding_;
  Tensor common_embedding_;
  Tensor distance_embedding_;
  BiLstm question_encoder_;
  BiLstm passage_encoder_;
  BiLstm advanced_encoder_;
  Tensor w_b_, w_e_, w_c_, w_o_, w_v_, w_z_;
};

/// Normalizes candidate scores into log-probabilities over the set.
Tensor score_candidates(const std::vector<Tensor>& scores);

/// -log of the total probability of candidates whose text equals a gold
/// answer; nullopt when no candidate matches (skip).
std::optional<Tensor> mle_select_loss(const SelectionOutput& out, const Example& ex,
                                      const std::vector<Span>& candidates);

}  // namespace xsel
