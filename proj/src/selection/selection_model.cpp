// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "xsel/errors.hpp"
#include "xsel/ops.hpp"
#include "xsel/rng.hpp"

namespace xsel {

bool& SelectionFeatures::flag(std::string_view name) {
  if (name == kNames[0]) return question_representation;
  if (name == kNames[1]) return common_words;
  if (name == kNames[2]) return candidate_representation;
  if (name == kNames[3]) return distance;
  if (name == kNames[4]) return candidate_dependent_passage;
  if (name == kNames[5]) return fused_representation;
  throw ConfigError("unknown selection feature '" + std::string(name) + "'");
}

bool SelectionFeatures::flag(std::string_view name) const {
  return const_cast<SelectionFeatures*>(this)->flag(name);
}

std::vector<std::string> SelectionFeatures::disabled() const {
  std::vector<std::string> out;
  for (auto name : kNames) {
    if (!flag(name)) out.emplace_back(name);
  }
  return out;
}

SelectionFeatures SelectionFeatures::without(const std::vector<std::string>& names) {
  SelectionFeatures f;
  for (const auto& n : names) f.flag(n) = false;
  return f;
}

std::vector<double> SelectionOutput::probs() const {
  std::vector<double> p(log_probs.numel());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_probs[i]);
  return p;
}

std::vector<bool> common_word_flags(const Tokens& passage, const Tokens& question) {
  const std::set<std::string> q(question.begin(), question.end());
  std::vector<bool> out(passage.size());
  for (std::size_t i = 0; i < passage.size(); ++i) out[i] = q.count(passage[i]) != 0;
  return out;
}

long signed_distance(std::size_t t, const Span& span) {
  if (t < span.begin) return static_cast<long>(t) - static_cast<long>(span.begin);
  if (t > span.end) return static_cast<long>(t) - static_cast<long>(span.end);
  return 0;
}

std::size_t distance_bucket(std::size_t t, const Span& span, std::size_t clip) {
  const long c = static_cast<long>(clip);
  return static_cast<std::size_t>(std::clamp(signed_distance(t, span), -c, c) + c);
}

Tokens span_tokens(const Example& ex, const Span& span) {
  const Tokens& p = ex.passages.at(span.passage);
  if (span.begin > span.end || span.end >= p.size()) throw BoundsError("span outside passage");
  return Tokens(p.begin() + span.begin, p.begin() + span.end + 1);
}

SelectionModel::SelectionModel(const ModelDims& dims, std::size_t vocab_size, Rng& rng,
                               SelectionFeatures features)
    : dims_(dims), features_(features) {
  const std::size_t h2 = 2 * dims.d_h;
  embedding_ = params_.add("sel.embedding", uniform_param({vocab_size, dims.d_w}, 0.1, rng));
  common_embedding_ = params_.add("sel.common", uniform_param({2, dims.common_dim}, 0.1, rng));
  distance_embedding_ = params_.add(
      "sel.distance", uniform_param({2 * dims.distance_clip + 1, dims.distance_dim}, 0.1, rng));
  question_encoder_ = BiLstm::make(params_, "sel.q_encoder", dims.d_w, dims.d_h, rng);
  passage_encoder_ =
      BiLstm::make(params_, "sel.p_encoder", dims.d_w + dims.common_dim + h2, dims.d_h, rng);
  advanced_encoder_ = BiLstm::make(params_, "sel.adv_encoder",
                                   2 * h2 + dims.distance_dim + 2 * dims.d_c, dims.d_h, rng);
  w_b_ = params_.add("sel.w_b", xavier_param(dims.d_c, h2, rng));
  w_e_ = params_.add("sel.w_e", xavier_param(dims.d_c, h2, rng));
  w_c_ = params_.add("sel.w_c", xavier_param(dims.d_c, dims.d_c, rng));
  w_o_ = params_.add("sel.w_o", xavier_param(dims.d_c, dims.d_c, rng));
  w_v_ = params_.add("sel.w_v", xavier_param(1, dims.d_c, rng));
  w_z_ = params_.add("sel.w_z", xavier_param(1, h2, rng));
}

Tensor SelectionModel::question_condensed(const std::vector<std::size_t>& question,
                                          const ForwardMode& mode) const {
  if (question.empty()) throw InputError("selection needs a non-empty question");
  Tensor q = embedding(embedding_, question);
  if (mode.training) q = dropout(q, mode.dropout, true, *mode.rng);
  return max_pool_time(question_encoder_(q));
}

Tensor SelectionModel::passage_base_rep(const std::vector<std::size_t>& passage,
                                        const std::vector<bool>& common, const Tensor& r_q,
                                        const ForwardMode& mode) const {
  if (passage.empty()) throw InputError("selection needs a non-empty passage");
  if (common.size() != passage.size()) throw DimensionError("common-word flags length mismatch");
  const std::size_t len = passage.size();
  Tensor words = embedding(embedding_, passage);
  if (mode.training) words = dropout(words, mode.dropout, true, *mode.rng);
  std::vector<std::size_t> common_ids(len);
  for (std::size_t t = 0; t < len; ++t) common_ids[t] = common[t] ? 1 : 0;
  Tensor common_feat = features_.common_words ? embedding(common_embedding_, common_ids)
                                              : Tensor::zeros({dims_.common_dim, len});
  Tensor question_feat = features_.question_representation ? broadcast_cols(r_q, len)
                                                           : Tensor::zeros({r_q.numel(), len});
  return passage_encoder_(concat_rows({words, common_feat, question_feat}));
}

Tensor SelectionModel::candidate_context(const Tensor& s_p, const Span& span) const {
  if (span.begin > span.end || span.end >= s_p.dim(1)) {
    throw BoundsError("span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                      "] outside passage of length " + std::to_string(s_p.dim(1)));
  }
  return slice_cols(s_p, span.begin, span.end + 1);
}

Tensor SelectionModel::candidate_rep(const Tensor& s_p, const Span& span) const {
  candidate_context(s_p, span);
  return tanh(add(matmul(w_b_, column(s_p, span.begin)), matmul(w_e_, column(s_p, span.end))));
}

FusionResult SelectionModel::fuse_candidates(const std::vector<Tensor>& reps) const {
  const std::size_t m = reps.size();
  if (m == 0) throw InputError("fuse_candidates needs at least one candidate");
  const Tensor r = stack_columns(reps);  // [d_c x M]
  std::vector<std::size_t> rows_j(m * m), cols_m(m * m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      rows_j[j * m + k] = j;
      cols_m[j * m + k] = k;
    }
  }
  // V[j, m] = w_v . tanh(W_c r_j + W_o r_m) for every ordered pair at once.
  const Tensor pairs = tanh(add(gather_cols(matmul(w_c_, r), rows_j), gather_cols(matmul(w_o_, r), cols_m)));
  FusionResult out;
  out.v = reshape(matmul(w_v_, pairs), {m, m});
  if (m == 1) {
    out.attention = Tensor::zeros({1, 1});
    out.fused = {Tensor::zeros({dims_.d_c})};
    return out;
  }
  std::vector<bool> off_diagonal(m * m, true);
  for (std::size_t j = 0; j < m; ++j) off_diagonal[j * m + j] = false;
  out.attention = softmax_masked(out.v, off_diagonal);
  const Tensor fused = matmul(r, transpose(out.attention));  // column j = sum_m A[j, m] r_m
  for (std::size_t j = 0; j < m; ++j) out.fused.push_back(column(fused, j));
  return out;
}

Tensor SelectionModel::advanced_passage_rep(const Tensor& s_p, const Span& span, const Tensor& r_c,
                                            const Tensor& fused) const {
  const Tensor s_c = candidate_context(s_p, span);
  const std::size_t len = s_p.dim(1);
  Tensor attended;
  if (features_.candidate_dependent_passage) {
    // Same attention as the extraction stage with S_C as the question side.
    const Tensor alpha = softmax(matmul(transpose(s_p), s_c));  // [l_p x span]
    attended = matmul(s_c, transpose(alpha));
  } else {
    attended = Tensor::zeros({s_p.dim(0), len});
  }
  Tensor dist;
  if (features_.distance) {
    std::vector<std::size_t> buckets(len);
    for (std::size_t t = 0; t < len; ++t) buckets[t] = distance_bucket(t, span, dims_.distance_clip);
    dist = embedding(distance_embedding_, buckets);
  } else {
    dist = Tensor::zeros({dims_.distance_dim, len});
  }
  const Tensor rc_feat = features_.candidate_representation ? broadcast_cols(r_c, len)
                                                            : Tensor::zeros({dims_.d_c, len});
  const Tensor fused_feat = features_.fused_representation ? broadcast_cols(fused, len)
                                                           : Tensor::zeros({dims_.d_c, len});
  return advanced_encoder_(concat_rows({s_p, attended, dist, rc_feat, fused_feat}));
}

Tensor SelectionModel::candidate_score(const Tensor& f_p) const {
  return reshape(matmul(w_z_, max_pool_time(f_p)), {});
}

SelectionOutput SelectionModel::forward(const EncodedExample& ex, const std::vector<Span>& candidates,
                                        const ForwardMode& mode) const {
  if (candidates.empty()) throw InputError("selection needs at least one candidate");
  const Tensor r_q = question_condensed(ex.question, mode);
  std::vector<Tensor> base(ex.passages.size());
  auto base_rep = [&](std::size_t p) -> const Tensor& {
    if (!base[p].defined()) {
      base[p] = passage_base_rep(ex.passages[p],
                                 common_word_flags(ex.source->passages[p], ex.source->question), r_q,
                                 mode);
    }
    return base[p];
  };
  std::vector<Tensor> reps;
  for (const Span& c : candidates) {
    if (c.passage >= ex.passages.size()) throw BoundsError("candidate passage out of range");
    reps.push_back(candidate_rep(base_rep(c.passage), c));
  }
  SelectionOutput out;
  out.fusion = fuse_candidates(reps);
  std::vector<Tensor> scores;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const Span& c = candidates[j];
    scores.push_back(
        candidate_score(advanced_passage_rep(base[c.passage], c, reps[j], out.fusion.fused[j])));
  }
  std::vector<Tensor> as_vec;
  for (const Tensor& s : scores) as_vec.push_back(reshape(s, {1}));
  out.scores = concat_rows(as_vec);
  out.log_probs = log_softmax(out.scores);
  return out;
}

Tensor score_candidates(const std::vector<Tensor>& scores) {
  if (scores.empty()) throw InputError("score_candidates needs at least one score");
  std::vector<Tensor> as_vec;
  for (const Tensor& s : scores) as_vec.push_back(reshape(s, {1}));
  return log_softmax(concat_rows(as_vec));
}

std::optional<Tensor> mle_select_loss(const SelectionOutput& out, const Example& ex,
                                      const std::vector<Span>& candidates) {
  const auto golds = ex.answer_tokens();
  std::vector<bool> match(candidates.size(), false);
  bool any = false;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const Tokens text = span_tokens(ex, candidates[j]);
    match[j] = std::find(golds.begin(), golds.end(), text) != golds.end();
    any = any || match[j];
  }
  if (!any) return std::nullopt;
  return scale(logsumexp_masked(out.log_probs, match), -1.0);
}

}  // namespace xsel
