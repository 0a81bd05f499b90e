// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "xsel/errors.hpp"
#include "xsel/extraction.hpp"
#include "xsel/ops.hpp"
#include "xsel/rng.hpp"

namespace xsel {

std::vector<double> SpanDistribution::probs() const {
  std::vector<double> p(log_probs.numel());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(log_probs[i]);
  return p;
}

std::optional<std::size_t> SpanDistribution::find(std::size_t begin, std::size_t end) const {
  const Span key{passage, begin, end};
  auto it = std::lower_bound(spans.begin(), spans.end(), key);
  if (it == spans.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - spans.begin());
}

SpanDistribution span_distribution_from_scores(const Tensor& begin_scores, const Tensor& end_scores,
                                               std::size_t max_len, std::size_t passage) {
  if (!begin_scores.defined() || begin_scores.rank() != 1 || !end_scores.defined() ||
      end_scores.shape() != begin_scores.shape()) {
    throw InputError("span scores must be two vectors of the passage length");
  }
  if (max_len == 0) throw ConfigError("maximum span length must be positive");
  SpanDistribution dist;
  dist.passage = passage;
  dist.passage_len = begin_scores.numel();
  std::vector<std::size_t> begins, ends;
  for (std::size_t k = 0; k < dist.passage_len; ++k) {
    for (std::size_t t = k; t < dist.passage_len && t - k < max_len; ++t) {
      dist.spans.push_back({passage, k, t});
      begins.push_back(k);
      ends.push_back(t);
    }
  }
  dist.log_probs = log_softmax(add(gather(begin_scores, begins), gather(end_scores, ends)));
  return dist;
}

std::vector<std::size_t> top_k_spans(const SpanDistribution& dist, std::size_t k) {
  const std::size_t n = dist.spans.size();
  if (k > n) {
    throw DegeneratePassageError("passage " + std::to_string(dist.passage) + " has " +
                                 std::to_string(n) + " valid spans, need " + std::to_string(k));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto lp = dist.log_probs.data();
  // Spans are enumerated by (begin, end), so index order is the tie order.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lp[a] > lp[b]; });
  order.resize(k);
  return order;
}

std::vector<std::size_t> sample_k_without_replacement(const std::vector<double>& probs, std::size_t k,
                                                      Rng& rng) {
  if (k > probs.size()) {
    throw DegeneratePassageError("cannot draw " + std::to_string(k) + " items from a support of " +
                                 std::to_string(probs.size()));
  }
  std::vector<bool> taken(probs.size(), false);
  std::vector<std::size_t> out;
  for (std::size_t draw = 0; draw < k; ++draw) {
    double remaining = 0.0;
    std::size_t last = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (!taken[i]) {
        remaining += probs[i];
        last = i;
      }
    }
    double u = rng.uniform() * remaining;
    std::size_t pick = last;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (taken[i]) continue;
      if (u < probs[i]) {
        pick = i;
        break;
      }
      u -= probs[i];
    }
    taken[pick] = true;
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void require_distinct(const std::vector<std::size_t>& chosen, std::size_t support) {
  std::set<std::size_t> seen;
  for (std::size_t c : chosen) {
    if (c >= support) throw BoundsError("chosen index " + std::to_string(c) + " out of range");
    if (!seen.insert(c).second) throw InputError("duplicate span in candidate set");
  }
  if (chosen.empty()) throw InputError("empty candidate set");
}

}  // namespace

double set_probability(const std::vector<double>& probs, const std::vector<std::size_t>& chosen) {
  require_distinct(chosen, probs.size());
  std::vector<std::size_t> order = chosen;
  std::sort(order.begin(), order.end());
  double total = 0.0;
  do {
    double p = 1.0, removed = 0.0;
    for (std::size_t i : order) {
      p *= probs[i] / (1.0 - removed);
      removed += probs[i];
    }
    total += p;
  } while (std::next_permutation(order.begin(), order.end()));
  return total;
}

Tensor set_log_prob(const Tensor& log_probs, const std::vector<std::size_t>& chosen) {
  require_distinct(chosen, log_probs.numel());
  if (chosen.size() == 1) return element(log_probs, chosen[0]);
  std::vector<std::size_t> order = chosen;
  std::sort(order.begin(), order.end());
  std::vector<Tensor> order_terms;
  do {
    // log of p(first) * prod_j p(j) / (mass left after earlier draws); the
    // leftover mass is a logsumexp over the undrawn spans, which stays exact
    // when the earlier draws hold nearly all of the mass.
    std::vector<bool> remaining(log_probs.numel(), true);
    Tensor term = element(log_probs, order[0]);
    remaining[order[0]] = false;
    for (std::size_t j = 1; j < order.size(); ++j) {
      term = add(term, sub(element(log_probs, order[j]), logsumexp_masked(log_probs, remaining)));
      remaining[order[j]] = false;
    }
    order_terms.push_back(reshape(term, {1}));
  } while (std::next_permutation(order.begin(), order.end()));
  return logsumexp(concat_rows(order_terms));
}

Tensor candidate_set_log_prob(const std::vector<SpanDistribution>& dists,
                              const std::vector<std::vector<std::size_t>>& chosen) {
  if (dists.size() != chosen.size() || dists.empty()) {
    throw InputError("one chosen set per passage is required");
  }
  std::vector<Tensor> parts;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    parts.push_back(reshape(set_log_prob(dists[i].log_probs, chosen[i]), {1}));
  }
  return sum(concat_rows(parts));
}

std::vector<std::pair<std::size_t, std::size_t>> find_answer_spans(const Tokens& passage,
                                                                   const std::vector<Tokens>& answers,
                                                                   std::size_t max_len) {
  std::set<std::pair<std::size_t, std::size_t>> found;
  for (const auto& ans : answers) {
    if (ans.empty() || ans.size() > max_len || ans.size() > passage.size()) continue;
    for (std::size_t b = 0; b + ans.size() <= passage.size(); ++b) {
      if (std::equal(ans.begin(), ans.end(), passage.begin() + b)) {
        found.emplace(b, b + ans.size() - 1);
      }
    }
  }
  return {found.begin(), found.end()};
}

}  // namespace xsel
