// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xsel/data.hpp"
#include "xsel/extraction.hpp"
#include "xsel/selection.hpp"

namespace xsel {

/// Top-K spans of every passage (fewer when a passage has fewer spans),
/// ordered by (passage, begin, end).
std::vector<Span> extract_candidates(const ExtractionModel& extraction, const EncodedExample& ex,
                                     std::size_t k, std::size_t max_len);

struct Prediction {
  bool abstain = false;
  Tokens text;
  Span span;
  std::vector<Span> candidates;
  std::vector<double> probs;
};

/// Deterministic two-stage prediction: top-K extraction, selection over all
/// candidates, argmax with ties going to the earliest (passage, begin, end).
Prediction predict(const EncodedExample& ex, const ExtractionModel& extraction,
                   const SelectionModel& selection, std::size_t k, std::size_t max_len);

/// Extraction-only baseline: the single most probable span over all passages.
Prediction predict_extraction_only(const EncodedExample& ex, const ExtractionModel& extraction,
                                   std::size_t max_len);

struct EvalRecord {
  std::string id;
  std::string prediction;
  double f1 = 0.0;
  bool em = false;
  double reward = 0.0;
};

struct EvalReport {
  double em = 0.0;  // percent
  double f1 = 0.0;  // percent
  std::size_t n = 0;
  double mean_reward = 0.0;
  std::vector<EvalRecord> records;

  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

/// Scores a list of predictions against their examples.
EvalReport score_predictions(const std::vector<Example>& corpus,
                             const std::vector<Prediction>& predictions);

struct EvalOptions {
  std::size_t k = 2;
  std::size_t max_len = kDefaultMaxSpanLen;
  std::size_t jobs = 1;
  bool extraction_only = false;
};

EvalReport evaluate(const std::vector<Example>& corpus, const Vocab& vocab,
                    const ExtractionModel& extraction, const SelectionModel& selection,
                    const EvalOptions& opts);

/// Scores every example by its best top-K candidate against the gold answers,
/// i.e. the EM/F1 an ideal selection stage would reach on these candidates.
EvalReport evaluate_candidate_recall(const std::vector<Example>& corpus, const Vocab& vocab,
                                     const ExtractionModel& extraction, std::size_t k,
                                     std::size_t max_len);

/// Writes the candidate-attention matrix of one question as CSV: a header row
/// and a leading column of candidate texts around the M x M weights.
void write_attention_csv(std::ostream& out, const Example& ex, const std::vector<Span>& candidates,
                         const Tensor& attention);

/// {"id": ..., "candidates": [{"passage", "begin", "end", "logp", "text"}, ...]}
nlohmann::json candidate_dump(const Example& ex, const std::vector<Span>& candidates,
                              const std::vector<double>& logps);

}  // namespace xsel
