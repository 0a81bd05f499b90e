// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "xsel/errors.hpp"
#include "xsel/eval.hpp"
#include "xsel/experiments.hpp"
#include "xsel/rng.hpp"
#include "xsel/train.hpp"

namespace xsel {
namespace {

ModelDims tiny_dims() {
  ModelDims d;
  d.d_w = 4;
  d.d_h = 3;
  d.d_c = 4;
  d.common_dim = 2;
  d.distance_dim = 3;
  d.distance_clip = 4;
  return d;
}

Example make_example(std::string id, Tokens q, std::string answer, std::vector<Tokens> passages) {
  Example ex;
  ex.id = std::move(id);
  ex.question = std::move(q);
  ex.answers = {std::move(answer)};
  ex.passages = std::move(passages);
  return ex;
}

Prediction said(const std::string& text) {
  Prediction p;
  p.text = tokenize(text);
  return p;
}

TEST(Score, AllExactAndAllDisjoint) {
  const std::vector<Example> corpus = {make_example("a", {"q"}, "x y", {{"x"}}),
                                       make_example("b", {"q"}, "z", {{"z"}})};
  const EvalReport exact = score_predictions(corpus, {said("x y"), said("z")});
  EXPECT_DOUBLE_EQ(exact.em, 100.0);
  EXPECT_DOUBLE_EQ(exact.f1, 100.0);
  const EvalReport wrong = score_predictions(corpus, {said("w"), said("v")});
  EXPECT_DOUBLE_EQ(wrong.em, 0.0);
  EXPECT_DOUBLE_EQ(wrong.f1, 0.0);
}

TEST(Score, MeanOfExactAndPartial) {
  const std::vector<Example> corpus = {make_example("a", {"q"}, "cuba libre", {{"x"}}),
                                       make_example("b", {"q"}, "lime juice", {{"x"}})};
  const EvalReport r = score_predictions(corpus, {said("Cuba Libre"), said("rum and lime")});
  EXPECT_DOUBLE_EQ(r.em, 50.0);
  EXPECT_NEAR(r.f1, 70.0, 1e-12);
  EXPECT_EQ(r.n, 2u);
  EXPECT_LE(r.em, r.f1 + 1e-9);
}

TEST(Score, AbstainCountsAsZero) {
  const std::vector<Example> corpus = {make_example("a", {"q"}, "x", {{"x"}})};
  Prediction p;
  p.abstain = true;
  const EvalReport r = score_predictions(corpus, {p});
  EXPECT_EQ(r.em, 0.0);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(Score, ReportFormats) {
  const std::vector<Example> corpus = {make_example("a", {"q"}, "x", {{"x"}})};
  const EvalReport r = score_predictions(corpus, {said("x")});
  const auto j = r.to_json();
  EXPECT_EQ(j.at("n"), 1);
  EXPECT_EQ(j.at("records").size(), 1u);
  std::ostringstream csv;
  r.write_csv(csv);
  EXPECT_NE(csv.str().find("a,"), std::string::npos);
}

struct Models {
  Vocab vocab;
  Rng rng{5};
  std::unique_ptr<ExtractionModel> ext;
  std::unique_ptr<SelectionModel> sel;
  explicit Models(Vocab v) : vocab(std::move(v)) {
    ext = std::make_unique<ExtractionModel>(tiny_dims(), vocab.size(), rng);
    sel = std::make_unique<SelectionModel>(tiny_dims(), vocab.size(), rng);
  }
};

TEST(Predict, SingleCandidate) {
  const Example ex = make_example("a", {"q"}, "x", {{"y"}});
  Models m(build_vocab({ex}));
  const EncodedExample enc = encode_example(ex, m.vocab);
  const Prediction p = predict(enc, *m.ext, *m.sel, 1, 8);
  EXPECT_EQ(p.text, (Tokens{"y"}));
  EXPECT_DOUBLE_EQ(p.probs[0], 1.0);
}

TEST(Predict, KOneSinglePassageIsExtractionArgmax) {
  const Example ex = make_example("a", {"q", "b"}, "x", {{"a", "b", "c", "d", "e"}});
  Models m(build_vocab({ex}));
  const EncodedExample enc = encode_example(ex, m.vocab);
  EXPECT_EQ(predict(enc, *m.ext, *m.sel, 1, 3).span, predict_extraction_only(enc, *m.ext, 3).span);
}

TEST(Predict, ArgmaxOverCandidatesNotStrings) {
  const Example ex = make_example("a", {"which", "c1", "c2"}, "g",
                                  {{"g", "c1", "f"}, {"h", "c2", "g"}, {"h", "f", "c1"},
                                   {"f", "h", "c2"}, {"h", "c1", "c2"}});
  Models m(build_vocab({ex}));
  const EncodedExample enc = encode_example(ex, m.vocab);
  const Prediction p = predict(enc, *m.ext, *m.sel, 2, 2);
  const auto cands = extract_candidates(*m.ext, enc, 2, 2);
  EXPECT_EQ(p.candidates, cands);
  const auto probs = m.sel->forward(enc, cands).probs();
  std::size_t best = 0;
  for (std::size_t j = 1; j < probs.size(); ++j) {
    if (probs[j] > probs[best]) best = j;
  }
  EXPECT_EQ(p.span, cands[best]);
  EXPECT_EQ(p.text, span_tokens(ex, cands[best]));
}

TEST(Candidates, TopKPerPassageOrdered) {
  const Example ex = make_example("a", {"q"}, "x", {{"a", "b", "c"}, {"d"}});
  Models m(build_vocab({ex}));
  const EncodedExample enc = encode_example(ex, m.vocab);
  const auto c = extract_candidates(*m.ext, enc, 2, 8);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
  EXPECT_EQ(c[2], (Span{1, 0, 0}));
}

TEST(Evaluate, PureAndEmptyCorpus) {
  SynthConfig cfg;
  cfg.train = 6;
  const auto corpus = gen_synthetic(cfg).train;
  Models m(build_vocab(corpus));
  EvalOptions opts;
  opts.max_len = 3;
  const EvalReport a = evaluate(corpus, m.vocab, *m.ext, *m.sel, opts);
  opts.jobs = 3;
  const EvalReport b = evaluate(corpus, m.vocab, *m.ext, *m.sel, opts);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_LE(a.em, a.f1 + 1e-9);
  const EvalReport empty = evaluate({}, m.vocab, *m.ext, *m.sel, opts);
  EXPECT_EQ(empty.n, 0u);
}

TEST(Attention, CsvShape) {
  const Example ex = make_example("a", {"q"}, "x", {{"x", "y"}});
  std::ostringstream out;
  write_attention_csv(out, ex, {{0, 0, 0}, {0, 1, 1}}, Tensor::matrix(2, 2, {0, 1, 1, 0}));
  std::string line;
  std::istringstream in(out.str());
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2);
  }
  EXPECT_EQ(lines, 3u);
  EXPECT_THROW(write_attention_csv(out, ex, {{0, 0, 0}}, Tensor::matrix(2, 2, {0, 1, 1, 0})), DimensionError);
}

TEST(Experiments, CsvHeader) {
  std::ostringstream out;
  ExperimentRow row;
  row.variant = "K=2";
  row.report.em = 50;
  row.report.f1 = 60;
  row.report.n = 4;
  row.seed = 9;
  write_experiment_csv(out, {row});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "variant,em,f1,n,seed");
  EXPECT_NE(out.str().find("K=2,"), std::string::npos);
}

TrainConfig quick_config() {
  TrainConfig c;
  c.seed = 3;
  c.batch_extract = 4;
  c.batch_select = 4;
  c.batch_rl = 3;
  c.epochs_extract = 1;
  c.epochs_select = 1;
  c.epochs_rl = 1;
  c.max_span_len = 3;
  return c;
}

TEST(Experiments, AblationBaseRowAndFeatureNames) {
  SynthConfig cfg;
  cfg.train = 8;
  cfg.dev = 4;
  cfg.passage_len = 8;
  const auto corpus = gen_synthetic(cfg);
  TrainConfig tc = quick_config();
  TrainState state = TrainState::create(build_vocab(corpus.train), tiny_dims(), 1);
  train_pipeline(state, corpus.train, corpus.dev, tc);
  const auto rows = run_ablation(state, corpus.train, corpus.dev, tc, {"fused_representation", "distance"});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].variant, "full");
  EXPECT_EQ(rows[0].report.to_json().dump(), evaluate_state(state, corpus.dev, tc).to_json().dump());
  EXPECT_NE(rows[1].variant.find("fused_representation"), std::string::npos);
  EXPECT_NE(rows[2].variant.find("distance"), std::string::npos);
  EXPECT_THROW(run_ablation(state, corpus.train, corpus.dev, tc, {"bogus"}), ConfigError);
}

TEST(Experiments, KSweepRowsAndValidation) {
  SynthConfig cfg;
  cfg.train = 6;
  cfg.dev = 3;
  cfg.passage_len = 8;
  const auto corpus = gen_synthetic(cfg);
  const Vocab vocab = build_vocab(corpus.train);
  const TrainConfig tc = quick_config();
  EXPECT_THROW(run_k_sweep(vocab, tiny_dims(), corpus.train, corpus.dev, tc, {1, 4}), ConfigError);
  const auto rows = run_k_sweep(vocab, tiny_dims(), corpus.train, corpus.dev, tc, {1});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].variant, "K=1");

  TrainConfig single = tc;
  single.k = 1;
  TrainState state = TrainState::create(vocab, tiny_dims(), tc.seed);
  train_pipeline(state, corpus.train, corpus.dev, single);
  EXPECT_EQ(rows[0].report.to_json().dump(), evaluate_state(state, corpus.dev, single).to_json().dump());
}

}  // namespace
}  // namespace xsel
