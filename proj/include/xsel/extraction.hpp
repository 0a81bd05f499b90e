// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "xsel/lstm.hpp"
#include "xsel/model.hpp"
#include "xsel/params.hpp"
#include "xsel/tensor.hpp"

namespace xsel {

class Rng;

inline constexpr std::size_t kDefaultMaxSpanLen = 8;
inline constexpr std::size_t kMaxCandidatesPerPassage = 3;

/// Token span [begin, end] (inclusive) of one passage.
struct Span {
  std::size_t passage = 0;
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin + 1; }
  auto operator<=>(const Span&) const = default;
};

/// Normalized distribution over every span of one passage with
/// end - begin < max_len, enumerated by begin then end.
struct SpanDistribution {
  std::size_t passage = 0;
  std::size_t passage_len = 0;
  std::vector<Span> spans;
  Tensor log_probs;  // [spans.size()]

  std::vector<double> probs() const;
  std::optional<std::size_t> find(std::size_t begin, std::size_t end) const;
};

/// log p(k, t) = b_k + e_t - logsumexp over all valid spans. Throws
/// InputError for an empty passage.
SpanDistribution span_distribution_from_scores(const Tensor& begin_scores, const Tensor& end_scores,
                                               std::size_t max_len, std::size_t passage = 0);

/// Indices of the K most probable spans, ties broken by smaller begin then
/// smaller end. Throws DegeneratePassageError when fewer than K spans exist.
std::vector<std::size_t> top_k_spans(const SpanDistribution& dist, std::size_t k);

/// Draws K distinct indices sequentially, renormalizing over the remaining
/// mass after each draw. Returned in ascending order (draw order discarded).
std::vector<std::size_t> sample_k_without_replacement(const std::vector<double>& probs, std::size_t k,
                                                      Rng& rng);

/// Probability of drawing exactly the unordered set `chosen` by sequential
/// sampling without replacement: the sum over all K! draw orders. Throws
/// InputError on a repeated index.
double set_probability(const std::vector<double>& probs, const std::vector<std::size_t>& chosen);

/// Differentiable log of `set_probability` over a normalized log-prob vector.
Tensor set_log_prob(const Tensor& log_probs, const std::vector<std::size_t>& chosen);

/// Sum of per-passage set log-probabilities.
Tensor candidate_set_log_prob(const std::vector<SpanDistribution>& dists,
                              const std::vector<std::vector<std::size_t>>& chosen);

/// Every (begin, end) where one of `answers` occurs verbatim in `passage`,
/// restricted to spans shorter than `max_len`, without duplicates.
std::vector<std::pair<std::size_t, std::size_t>> find_answer_spans(const Tokens& passage,
                                                                   const std::vector<Tokens>& answers,
                                                                   std::size_t max_len);

/// Candidate extraction network: word embeddings, a shared BiLSTM over
/// question and passage, question-aware attention, a second BiLSTM over the
/// concatenation, and linear begin/end scorers.
class ExtractionModel {
 public:
  struct Encoding {
    Tensor h_q;      // [2h x l_q]
    Tensor h_p;      // [2h x l_p]
    Tensor alpha;    // [l_p x l_q]
    Tensor h_tilde;  // [2h x l_p]
    Tensor g;        // [2h x l_p]
  };

  ExtractionModel(const ModelDims& dims, std::size_t vocab_size, Rng& rng);
  ExtractionModel(const ExtractionModel&) = delete;
  ExtractionModel& operator=(const ExtractionModel&) = delete;

  const ModelDims& dims() const { return dims_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  Encoding encode(const std::vector<std::size_t>& question, const std::vector<std::size_t>& passage,
                  const ForwardMode& mode = {}) const;
  Tensor encode_passage(const std::vector<std::size_t>& question,
                        const std::vector<std::size_t>& passage, const ForwardMode& mode = {}) const {
    return encode(question, passage, mode).g;
  }
  /// (b, e), each [l_p].
  std::pair<Tensor, Tensor> boundary_scores(const Tensor& g) const;
  SpanDistribution span_distribution(const Tensor& g, std::size_t max_len,
                                     std::size_t passage = 0) const;
  /// Distributions for every passage of an example.
  std::vector<SpanDistribution> distributions(const EncodedExample& ex, std::size_t max_len,
                                              const ForwardMode& mode = {}) const;

 private:
  ModelDims dims_;
  ParamStore params_;
  Tensor embedding_;
  BiLstm encoder_;
  BiLstm fusion_;
  Tensor w_begin_;
  Tensor w_end_;
};

/// Mean negative log-likelihood of every gold span occurrence over passages
/// that contain a gold answer. nullopt signals that no passage does (skip).
std::optional<Tensor> mle_extract_loss(const EncodedExample& ex, const ExtractionModel& model,
                                       std::size_t max_len, const ForwardMode& mode = {});

}  // namespace xsel
