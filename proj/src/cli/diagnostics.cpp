// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/diagnostics.hpp"

#include <algorithm>

#include "xsel/extraction.hpp"
#include "xsel/lstm.hpp"
#include "xsel/ops.hpp"
#include "xsel/params.hpp"
#include "xsel/rng.hpp"
#include "xsel/selection.hpp"
#include "xsel/train.hpp"

namespace xsel {

ToyInstance make_toy_instance(std::uint64_t seed, std::size_t passages, std::size_t passage_len,
                              std::size_t vocab_size) {
  Rng rng(derive_seed(seed, "toy", 0));
  const std::size_t words = vocab_size - 2;
  auto word = [&] { return "t" + std::to_string(rng.below(words)); };

  ToyInstance toy;
  Example& ex = toy.example;
  ex.id = "toy";
  for (int i = 0; i < 4; ++i) ex.question.push_back(word());
  for (std::size_t p = 0; p < passages; ++p) {
    Tokens passage;
    for (std::size_t t = 0; t < passage_len; ++t) passage.push_back(word());
    ex.passages.push_back(std::move(passage));
  }
  ex.passages[0][1] = ex.question[0];
  ex.answers = {join_tokens({ex.passages[0][2], ex.passages[0][3]})};

  Tokens all;
  for (std::size_t i = 0; i < words; ++i) all.push_back("t" + std::to_string(i));
  Example vocab_source;
  vocab_source.question = all;
  toy.vocab = build_vocab({vocab_source});
  toy.dims = ModelDims{6, 4, 5, 3, 3, 20};
  return toy;
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.result.max_rel_error);
  return m;
}

std::size_t GradCheckReport::checked() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.result.checked;
  return n;
}

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.mutable_data()) v = rng.uniform(lo, hi);
  t.set_requires_grad(true);
  return t;
}

void add_op_checks(GradCheckReport& report, Rng& rng, const GradCheckOptions& opts) {
  Tensor a = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({3, 4}, rng);
  Tensor m = random_tensor({4, 5}, rng);
  Tensor v = random_tensor({5}, rng);
  Tensor pos = random_tensor({3, 4}, rng, 0.5, 2.0);
  const NamedTensors inputs = {{"a", a}, {"b", b}, {"m", m}, {"v", v}, {"pos", pos}};

  auto check = [&](const std::string& name, const std::function<Tensor()>& fn) {
    report.entries.push_back({"op:" + name, check_gradients(fn, inputs, opts)});
  };
  check("elementwise", [&] {
    return sum(add(mul(tanh(a), sigmoid(b)), sub(exp(scale(a, 0.5)), log(shift(pos, 0.1)))));
  });
  check("matmul", [&] { return sum(tanh(matmul(transpose(matmul(a, m)), b))); });
  check("matvec", [&] { return sum(tanh(matmul(m, v))); });
  check("softmax", [&] {
    std::vector<bool> mask(15, true);
    mask[1] = mask[7] = mask[13] = false;
    Tensor s = softmax_masked(matmul(a, m), mask);
    return sum(mul(s, tanh(matmul(a, m))));
  });
  check("softmax_vector", [&] { return sum(mul(softmax(v), v)); });
  check("logsumexp", [&] {
    return add(logsumexp(v), logsumexp_masked(v, {false, true, true, false, true}));
  });
  check("log_softmax", [&] { return sum(mul(log_softmax(v), gather(v, {4, 3, 2, 1, 0}))); });
  check("pool_and_index", [&] {
    Tensor x = matmul(a, m);
    Tensor pooled = max_pool_time(x);
    Tensor picked = gather_cols(x, {0, 2, 2, 4});
    Tensor stacked = stack_columns({column(x, 1), pooled});
    Tensor cat = concat_rows({slice_cols(x, 1, 3), broadcast_cols(pooled, 2)});
    return add(add(sum(tanh(picked)), sum(mul(stacked, stacked))),
               add(sum(tanh(cat)), element(v, 2)));
  });
  check("reshape_embedding", [&] {
    Tensor e = embedding(m, {3, 0, 3, 1});
    return sum(tanh(matmul(e, reshape(a, {4, 3}))));
  });
  check("set_log_prob", [&] {
    Tensor lp = log_softmax(v);
    return add(set_log_prob(lp, {1, 3}), set_log_prob(lp, {0, 2, 4}));
  });

  ParamStore lstm_params;
  Rng init(rng.next_u64());
  const LstmWeights w = make_lstm(lstm_params, "lstm", 3, 4, init);
  Tensor x = random_tensor({3, 5}, rng);
  NamedTensors lstm_inputs = named(lstm_params);
  lstm_inputs.emplace_back("x", x);
  report.entries.push_back(
      {"op:lstm", check_gradients(
                      [&] {
                        return add(sum(tanh(lstm_sequence(x, w, false))),
                                   sum(mul(lstm_sequence(x, w, true), lstm_sequence(x, w, true))));
                      },
                      lstm_inputs, opts)});
}

}  // namespace

GradCheckReport run_gradcheck_suite(std::uint64_t seed, const GradCheckOptions& opts) {
  GradCheckReport report;
  Rng rng(derive_seed(seed, "gradcheck", 0));
  add_op_checks(report, rng, opts);

  const ToyInstance toy = make_toy_instance(seed);
  const TrainState state = TrainState::create(toy.vocab, toy.dims, seed);
  const EncodedExample ex = encode_example(toy.example, toy.vocab);
  const std::size_t k = 2, max_len = 3;
  const ExtractionModel& extraction = *state.extraction;
  const SelectionModel& selection = *state.selection;
  const NamedTensors ext_params = named(extraction.params());
  NamedTensors all_params = ext_params;
  for (auto& p : named(selection.params())) all_params.push_back(p);

  report.entries.push_back(
      {"model:extraction_mle",
       check_gradients([&] { return *mle_extract_loss(ex, extraction, max_len); }, ext_params, opts)});

  // {0, 2, 3} is the gold span.
  std::vector<Span> candidates = {{0, 2, 3}, {0, 5, 5}, {1, 0, 1}, {1, 4, 6}};
  report.entries.push_back(
      {"model:selection_mle",
       check_gradients(
           [&] { return *mle_select_loss(selection.forward(ex, candidates), toy.example, candidates); },
           named(selection.params()), opts)});

  std::vector<std::vector<std::size_t>> chosen;
  {
    const auto dists = extraction.distributions(ex, max_len);
    Rng draw(derive_seed(seed, "gradcheck-draw", 0));
    for (const auto& d : dists) chosen.push_back(sample_k_without_replacement(d.probs(), k, draw));
  }
  // Both factors of the REINFORCE surrogate: log P(set) and R.
  report.entries.push_back(
      {"model:candidate_set",
       check_gradients(
           [&] {
             const auto dists = extraction.distributions(ex, max_len);
             std::vector<Span> chosen_spans;
             for (std::size_t p = 0; p < dists.size(); ++p) {
               for (std::size_t i : chosen[p]) chosen_spans.push_back(dists[p].spans[i]);
             }
             return add(candidate_set_log_prob(dists, chosen),
                        expected_selection_reward(ex, selection, chosen_spans));
           },
           all_params, opts)});
  return report;
}

}  // namespace xsel
