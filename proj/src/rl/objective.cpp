// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "xsel/errors.hpp"
#include "xsel/ops.hpp"
#include "xsel/reward.hpp"
#include "xsel/train.hpp"

namespace xsel {

namespace {

struct SetScore {
  Tensor expected;  // scalar R = sum_C P(C | set) r(C)
  std::vector<Span> candidates;
};

SetScore score_set(const EncodedExample& ex, const SelectionModel& selection,
                   const std::vector<SpanDistribution>& dists,
                   const std::vector<std::vector<std::size_t>>& chosen, const ForwardMode& mode) {
  SetScore s;
  for (std::size_t p = 0; p < dists.size(); ++p) {
    for (std::size_t i : chosen[p]) s.candidates.push_back(dists[p].spans[i]);
  }
  std::sort(s.candidates.begin(), s.candidates.end());
  s.expected = expected_selection_reward(ex, selection, s.candidates, mode);
  return s;
}

void combinations(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    combinations(n, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

Tensor expected_selection_reward(const EncodedExample& ex, const SelectionModel& selection,
                                 const std::vector<Span>& candidates, const ForwardMode& mode) {
  const SelectionOutput out = selection.forward(ex, candidates, mode);
  const auto golds = ex.source->answer_tokens();
  std::vector<double> rewards;
  for (const Span& c : candidates) rewards.push_back(reward(span_tokens(*ex.source, c), golds));
  return sum(mul(exp(out.log_probs), Tensor::vector(std::move(rewards))));
}

RlSample reinforce_surrogate(const EncodedExample& ex, const ExtractionModel& extraction,
                             const SelectionModel& selection, std::size_t max_len,
                             const std::vector<std::vector<std::size_t>>& chosen,
                             const ForwardMode& mode, double baseline) {
  const auto dists = extraction.distributions(ex, max_len, mode);
  if (chosen.size() != dists.size()) throw InputError("one chosen set per passage is required");
  const Tensor set_logp = candidate_set_log_prob(dists, chosen);
  SetScore s = score_set(ex, selection, dists, chosen, mode);
  RlSample out;
  out.expected_reward = s.expected.item();
  out.chosen = chosen;
  out.candidates = std::move(s.candidates);
  // The return multiplying log P(set) is a constant, so only the selection
  // term differentiates through R.
  out.surrogate = scale(add(s.expected, scale(set_logp, out.expected_reward - baseline)), -1.0);
  return out;
}

RlSample reinforce_sample(const EncodedExample& ex, const ExtractionModel& extraction,
                          const SelectionModel& selection, std::size_t k, std::size_t max_len,
                          Rng& rng, const ForwardMode& mode, double baseline) {
  const auto dists = extraction.distributions(ex, max_len, mode);
  std::vector<std::vector<std::size_t>> chosen;
  for (const auto& d : dists) {
    chosen.push_back(sample_k_without_replacement(d.probs(), std::min(k, d.spans.size()), rng));
  }
  const Tensor set_logp = candidate_set_log_prob(dists, chosen);
  SetScore s = score_set(ex, selection, dists, chosen, mode);
  RlSample out;
  out.expected_reward = s.expected.item();
  out.chosen = std::move(chosen);
  out.candidates = std::move(s.candidates);
  out.surrogate = scale(add(s.expected, scale(set_logp, out.expected_reward - baseline)), -1.0);
  return out;
}

std::vector<std::vector<std::vector<std::size_t>>> enumerate_candidate_sets(
    const std::vector<SpanDistribution>& dists, std::size_t k, std::size_t budget) {
  std::vector<std::vector<std::vector<std::size_t>>> per_passage;
  double total = 1.0;
  for (const auto& d : dists) {
    std::vector<std::vector<std::size_t>> combos;
    std::vector<std::size_t> cur;
    combinations(d.spans.size(), std::min(k, d.spans.size()), 0, cur, combos);
    total *= static_cast<double>(combos.size());
    if (total > static_cast<double>(budget)) {
      throw BudgetError("candidate-set enumeration exceeds the budget of " + std::to_string(budget));
    }
    per_passage.push_back(std::move(combos));
  }
  std::vector<std::vector<std::vector<std::size_t>>> out{{}};
  for (const auto& combos : per_passage) {
    std::vector<std::vector<std::vector<std::size_t>>> next;
    for (const auto& prefix : out) {
      for (const auto& c : combos) {
        auto ext = prefix;
        ext.push_back(c);
        next.push_back(std::move(ext));
      }
    }
    out = std::move(next);
  }
  return out;
}

Tensor expected_reward_loss(const EncodedExample& ex, const ExtractionModel& extraction,
                            const SelectionModel& selection, std::size_t k, std::size_t max_len,
                            std::size_t budget) {
  const auto dists = extraction.distributions(ex, max_len);
  const auto sets = enumerate_candidate_sets(dists, k, budget);
  std::vector<Tensor> terms;
  for (const auto& chosen : sets) {
    const Tensor p_set = exp(candidate_set_log_prob(dists, chosen));
    terms.push_back(reshape(mul(p_set, score_set(ex, selection, dists, chosen, {}).expected), {1}));
  }
  return scale(sum(concat_rows(terms)), -1.0);
}

}  // namespace xsel
