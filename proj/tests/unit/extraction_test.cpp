// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <gtest/gtest.h>

#include "xsel/errors.hpp"
#include "xsel/extraction.hpp"
#include "xsel/gradcheck.hpp"
#include "xsel/ops.hpp"
#include "xsel/rng.hpp"
#include "xsel/tape.hpp"

namespace xsel {
namespace {

ModelDims small_dims() {
  ModelDims d;
  d.d_w = 5;
  d.d_h = 4;
  d.d_c = 6;
  d.common_dim = 2;
  d.distance_dim = 3;
  d.distance_clip = 4;
  return d;
}

std::vector<std::size_t> random_ids(std::size_t n, std::size_t vocab, Rng& rng) {
  std::vector<std::size_t> ids(n);
  for (auto& i : ids) i = 2 + rng.below(vocab - 2);
  return ids;
}

void zero_params(ParamStore& store, const std::string& prefix) {
  for (auto& [name, t] : store) {
    if (name.rfind(prefix, 0) == 0) std::fill(t.mutable_data().begin(), t.mutable_data().end(), 0.0);
  }
}

double total_prob(const SpanDistribution& d) {
  const auto p = d.probs();
  return std::accumulate(p.begin(), p.end(), 0.0);
}

TEST(Encode, SingleQuestionPosition) {
  Rng rng(1);
  ExtractionModel model(small_dims(), 12, rng);
  const auto enc = model.encode({3}, random_ids(6, 12, rng));
  ASSERT_EQ(enc.alpha.shape(), (Shape{6, 1}));
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_DOUBLE_EQ(enc.alpha.at(t, 0), 1.0);
    for (std::size_t i = 0; i < enc.h_q.rows(); ++i) EXPECT_DOUBLE_EQ(enc.h_tilde.at(i, t), enc.h_q.at(i, 0));
  }
}

TEST(Encode, AttentionRowsNormalize) {
  Rng rng(2);
  ExtractionModel model(small_dims(), 12, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const auto enc = model.encode(random_ids(4, 12, rng), random_ids(7, 12, rng));
    for (std::size_t t = 0; t < 7; ++t) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += enc.alpha.at(t, k);
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Encode, ZeroEncoderGivesUniformAttention) {
  Rng rng(3);
  ExtractionModel model(small_dims(), 12, rng);
  zero_params(model.params(), "ext.encoder");
  const auto enc = model.encode(random_ids(5, 12, rng), random_ids(6, 12, rng));
  for (double v : enc.h_q.data()) EXPECT_EQ(v, 0.0);
  for (double v : enc.h_p.data()) EXPECT_EQ(v, 0.0);
  for (double v : enc.alpha.data()) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Encode, EmptyInputThrows) {
  Rng rng(4);
  ExtractionModel model(small_dims(), 12, rng);
  EXPECT_THROW(model.encode({}, {2, 3}), InputError);
  EXPECT_THROW(model.encode({2}, {}), InputError);
}

TEST(SpanDistribution, UniformScores) {
  const auto d = span_distribution_from_scores(Tensor::vector({0, 0}), Tensor::vector({0, 0}), 8);
  ASSERT_EQ(d.spans.size(), 3u);
  for (double p : d.probs()) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  EXPECT_THROW(span_distribution_from_scores(Tensor(), Tensor(), 8), InputError);
}

TEST(SpanDistribution, ExhaustiveOracle) {
  const auto d = span_distribution_from_scores(Tensor::vector({1, 0, 0}), Tensor::vector({0, 0, 1}), 3);
  const double b[3] = {1, 0, 0}, e[3] = {0, 0, 1};
  double z = 0.0;
  for (int k = 0; k < 3; ++k) {
    for (int t = k; t < 3; ++t) z += std::exp(b[k] + e[t]);
  }
  const auto idx = d.find(0, 2);
  ASSERT_TRUE(idx.has_value());
  EXPECT_NEAR(d.probs()[*idx], std::exp(2.0) / z, 1e-15);
  EXPECT_NEAR(d.probs()[*idx], std::exp(2.0) / (4 * std::exp(1.0) + std::exp(2.0) + 1), 1e-15);
  EXPECT_NEAR(d.probs()[*idx], 0.3836, 1e-4);
}

TEST(SpanDistribution, LengthCapAndShift) {
  Rng rng(5);
  for (std::size_t max_len = 1; max_len <= 7; ++max_len) {
    std::vector<double> b(7), e(7);
    for (auto& v : b) v = rng.uniform(-3, 3);
    for (auto& v : e) v = rng.uniform(-3, 3);
    const auto d = span_distribution_from_scores(Tensor::vector(b), Tensor::vector(e), max_len);
    EXPECT_NEAR(total_prob(d), 1.0, 1e-10);
    for (const Span& s : d.spans) EXPECT_LE(s.length(), max_len);
    std::size_t expected = 0;
    for (std::size_t k = 0; k < 7; ++k) expected += std::min<std::size_t>(max_len, 7 - k);
    EXPECT_EQ(d.spans.size(), expected);

    std::vector<double> b2 = b, e2 = e;
    for (auto& v : b2) v += 4.5;
    for (auto& v : e2) v -= 1.25;
    const auto d2 = span_distribution_from_scores(Tensor::vector(b2), Tensor::vector(e2), max_len);
    for (std::size_t i = 0; i < d.spans.size(); ++i) EXPECT_NEAR(d.probs()[i], d2.probs()[i], 1e-12);
    EXPECT_EQ(top_k_spans(d, std::min<std::size_t>(2, d.spans.size())),
              top_k_spans(d2, std::min<std::size_t>(2, d.spans.size())));
  }
}

TEST(TopK, TieRule) {
  const auto d = span_distribution_from_scores(Tensor::vector({0, 0}), Tensor::vector({0, 0}), 8);
  const auto top = top_k_spans(d, 2);
  EXPECT_EQ(d.spans[top[0]], (Span{0, 0, 0}));
  EXPECT_EQ(d.spans[top[1]], (Span{0, 0, 1}));
  EXPECT_THROW(top_k_spans(d, 4), DegeneratePassageError);
}

TEST(TopK, AgreesWithSort) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> b(6), e(6);
    for (auto& v : b) v = rng.uniform(-2, 2);
    for (auto& v : e) v = rng.uniform(-2, 2);
    const auto d = span_distribution_from_scores(Tensor::vector(b), Tensor::vector(e), 4);
    std::vector<std::size_t> order(d.spans.size());
    std::iota(order.begin(), order.end(), 0);
    const auto p = d.probs();
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return p[x] > p[y]; });
    const auto top = top_k_spans(d, 2);
    EXPECT_EQ(top[0], order[0]);
    EXPECT_EQ(top[1], order[1]);
  }
}

TEST(Sampling, FullSupport) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(sample_k_without_replacement({0.2, 0.5, 0.3}, 3, rng), (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(sample_k_without_replacement({0.5, 0.5}, 2, rng), (std::vector<std::size_t>{0, 1}));
  }
  EXPECT_THROW(sample_k_without_replacement({0.5, 0.5}, 3, rng), DegeneratePassageError);
}

TEST(Sampling, PairFrequency) {
  Rng rng(8);
  const std::vector<double> p{0.5, 0.3, 0.2};
  std::map<std::vector<std::size_t>, std::size_t> counts;
  const std::size_t n = 200000;
  for (std::size_t i = 0; i < n; ++i) ++counts[sample_k_without_replacement(p, 2, rng)];
  for (const auto& [pair, c] : counts) {
    const std::size_t a = pair[0], b = pair[1];
    const double expected = p[a] * p[b] / (1 - p[a]) + p[b] * p[a] / (1 - p[b]);
    const double sigma = std::sqrt(expected * (1 - expected) / n);
    EXPECT_NEAR(static_cast<double>(c) / n, expected, 3 * sigma);
  }
  EXPECT_NEAR(static_cast<double>(counts[{0, 1}]) / n, 0.51428, 0.005);
}

TEST(SetProbability, Values) {
  const std::vector<double> p{0.5, 0.3, 0.2};
  EXPECT_DOUBLE_EQ(set_probability(p, {1}), 0.3);
  EXPECT_NEAR(set_probability(p, {0, 1}), 0.5 * 0.3 / 0.5 + 0.3 * 0.5 / 0.7, 1e-15);
  EXPECT_NEAR(set_probability(p, {0, 1}), 0.514285714285714, 1e-12);
  const std::vector<double> u(3, 1.0 / 3.0);
  EXPECT_NEAR(set_probability(u, {0, 2}), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(set_probability(p, {1, 1}), InputError);
  double all = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) all += set_probability(p, {a, b});
  }
  EXPECT_NEAR(all, 1.0, 1e-15);
}

TEST(SetProbability, ThreeOfFourSumsToOne) {
  const std::vector<double> p{0.4, 0.3, 0.2, 0.1};
  double all = 0.0;
  for (std::size_t skip = 0; skip < 4; ++skip) {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i != skip) chosen.push_back(i);
    }
    all += set_probability(p, chosen);
  }
  EXPECT_NEAR(all, 1.0, 1e-15);
}

TEST(SetProbability, LogMatchesAndDifferentiates) {
  std::vector<double> lp{std::log(0.5), std::log(0.3), std::log(0.2)};
  EXPECT_NEAR(set_log_prob(Tensor::vector(lp), {0, 1}).item(), std::log(0.514285714285714), 1e-12);
  Tensor x = Tensor::vector({0.3, -0.2, 0.9, 0.1}, true);
  const auto r = check_gradients([&] { return set_log_prob(log_softmax(x), {1, 3}); }, {{"x", x}});
  EXPECT_LT(r.max_rel_error, 1e-6);
}

TEST(FindAnswerSpans, AllOccurrences) {
  const Tokens p{"a", "b", "c", "a", "b"};
  const auto hits = find_answer_spans(p, {{"a", "b"}, {"c"}}, 8);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0], (std::pair<std::size_t, std::size_t>{0, 1}));
  EXPECT_TRUE(find_answer_spans(p, {{"a", "b", "c"}}, 2).empty());
}

TEST(MleExtract, UniformIsLogThree) {
  Rng rng(9);
  ExtractionModel model(small_dims(), 10, rng);
  zero_params(model.params(), "ext.w_");
  Example ex;
  ex.question = {"q"};
  ex.answers = {"y"};
  ex.passages = {{"x", "y"}};
  const Vocab vocab(std::vector<std::string>{"q", "x", "y"});
  const EncodedExample enc = encode_example(ex, vocab);
  const auto loss = mle_extract_loss(enc, model, 8);
  ASSERT_TRUE(loss.has_value());
  EXPECT_NEAR(loss->item(), std::log(3.0), 1e-12);

  ex.answers = {"z"};
  EXPECT_FALSE(mle_extract_loss(encode_example(ex, vocab), model, 8).has_value());
}

TEST(MleExtract, MultipleOccurrencesAverage) {
  Rng rng(10);
  ExtractionModel model(small_dims(), 10, rng);
  Example ex;
  ex.question = {"q", "x"};
  ex.answers = {"y"};
  ex.passages = {{"y", "x", "y", "x"}, {"x", "x"}, {"x", "y"}};
  const Vocab vocab(std::vector<std::string>{"q", "x", "y"});
  const EncodedExample enc = encode_example(ex, vocab);
  const auto dists = model.distributions(enc, 8);
  const double l0 = dists[0].log_probs[*dists[0].find(0, 0)];
  const double l2 = dists[0].log_probs[*dists[0].find(2, 2)];
  const double l4 = dists[2].log_probs[*dists[2].find(1, 1)];
  EXPECT_NEAR(mle_extract_loss(enc, model, 8)->item(), -(l0 + l2 + l4) / 3.0, 1e-12);
}

TEST(MleExtract, RandomParametersNormalize) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    ExtractionModel model(small_dims(), 15, rng);
    const auto g = model.encode_passage(random_ids(3, 15, rng), random_ids(9, 15, rng));
    for (std::size_t max_len : {1, 3, 8, 20}) EXPECT_NEAR(total_prob(model.span_distribution(g, max_len)), 1.0, 1e-10);
  }
}

TEST(MleExtract, GradientMatchesFiniteDifferences) {
  Rng rng(12);
  ModelDims dims = small_dims();
  dims.d_w = 3;
  dims.d_h = 2;
  ExtractionModel model(dims, 8, rng);
  Example ex;
  ex.question = {"a", "b"};
  ex.answers = {"c d"};
  ex.passages = {{"a", "c", "d", "e"}, {"e", "c", "d"}};
  const Vocab vocab(std::vector<std::string>{"a", "b", "c", "d", "e"});
  const EncodedExample enc = encode_example(ex, vocab);
  const auto r = check_gradients([&] { return *mle_extract_loss(enc, model, 3); }, named(model.params()));
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

}  // namespace
}  // namespace xsel
