// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance checks. Prints one PASS/FAIL line per check and exits non-zero
// if any check fails. Names given on the command line restrict the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xsel/cli.hpp"
#include "xsel/diagnostics.hpp"
#include "xsel/errors.hpp"
#include "xsel/eval.hpp"
#include "xsel/experiments.hpp"
#include "xsel/extraction.hpp"
#include "xsel/ops.hpp"
#include "xsel/reward.hpp"
#include "xsel/rng.hpp"
#include "xsel/selection.hpp"
#include "xsel/tape.hpp"
#include "xsel/train.hpp"

namespace fs = std::filesystem;
using namespace xsel;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Desk-scale synthetic task and training schedule.
SynthConfig task(double fraction) {
  SynthConfig c;
  c.vocab_size = 10;
  c.num_entities = 6;
  c.cross_fraction = fraction;
  c.passages = 5;
  c.distractors = 0;
  c.train = 500;
  c.dev = 100;
  c.test = 100;
  c.seed = 1;
  return c;
}

ModelDims desk_dims() {
  ModelDims d;
  d.d_w = 24;
  d.d_h = 24;
  d.d_c = 48;
  return d;
}

TrainConfig schedule() {
  TrainConfig c;
  c.seed = 1;
  c.epochs_extract = 20;
  c.epochs_select = 60;
  c.epochs_rl = 2;
  c.patience = 60;
  c.eval_every = 50;
  return c;
}

Outcome gradient_integrity() {
  const Timer t;
  const GradCheckReport r = run_gradcheck_suite(7);
  const double secs = t.seconds();
  return {r.max_rel_error() < 1e-4 && secs < 60.0,
          "max rel error " + fmt(r.max_rel_error()) + " over " + std::to_string(r.checked()) +
              " entries, " + fmt(secs) + " s"};
}

Outcome normalization() {
  double worst_span = 0.0, worst_attention = 0.0, worst_select = 0.0, worst_shift = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ToyInstance toy = make_toy_instance(seed, 3, 8, 20);
    Rng rng(seed + 1000);
    ExtractionModel ext(toy.dims, toy.vocab.size(), rng);
    SelectionModel sel(toy.dims, toy.vocab.size(), rng);
    const EncodedExample enc = encode_example(toy.example, toy.vocab);
    const auto dists = ext.distributions(enc, 4);
    std::vector<Span> cands;
    for (const auto& d : dists) {
      worst_span = std::max(worst_span, std::abs(sum_of(d.probs()) - 1.0));
      for (std::size_t i : top_k_spans(d, 2)) cands.push_back(d.spans[i]);
    }
    const SelectionOutput out = sel.forward(enc, cands);
    worst_select = std::max(worst_select, std::abs(sum_of(out.probs()) - 1.0));
    const Tensor& a = out.fusion.attention;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < a.cols(); ++c) s += a.at(r, c);
      worst_attention = std::max(worst_attention, std::abs(s - 1.0));
    }

    Rng draw(seed);
    std::vector<double> b(8), e(8), m(6);
    for (auto& x : b) x = draw.uniform(-6.0, 6.0);
    for (auto& x : e) x = draw.uniform(-6.0, 6.0);
    for (auto& x : m) x = draw.uniform(-6.0, 6.0);
    const double c = draw.uniform(-50.0, 50.0);
    auto shifted = [c](std::vector<double> v) {
      for (auto& x : v) x += c;
      return v;
    };
    const auto p0 = span_distribution_from_scores(Tensor::vector(b), Tensor::vector(e), 4).probs();
    const auto p1 = span_distribution_from_scores(Tensor::vector(shifted(b)), Tensor::vector(e), 4).probs();
    for (std::size_t i = 0; i < p0.size(); ++i) worst_shift = std::max(worst_shift, std::abs(p0[i] - p1[i]));
    const std::vector<bool> mask = {true, true, false, true, true, true};
    const Tensor q0 = softmax_masked(Tensor::vector(m), mask);
    const Tensor q1 = softmax_masked(Tensor::vector(shifted(m)), mask);
    for (std::size_t i = 0; i < m.size(); ++i) worst_shift = std::max(worst_shift, std::abs(q0[i] - q1[i]));
    std::vector<Tensor> s0, s1;
    for (double x : m) {
      s0.push_back(Tensor::scalar(x));
      s1.push_back(Tensor::scalar(x + c));
    }
    const Tensor l0 = score_candidates(s0), l1 = score_candidates(s1);
    for (std::size_t i = 0; i < m.size(); ++i) {
      worst_shift = std::max(worst_shift, std::abs(std::exp(l0[i]) - std::exp(l1[i])));
    }
  }
  const bool pass = worst_span < 1e-10 && worst_attention < 1e-10 && worst_select < 1e-10 && worst_shift < 1e-12;
  return {pass, "span " + fmt(worst_span) + ", attention rows " + fmt(worst_attention) + ", selection " +
                    fmt(worst_select) + ", shift " + fmt(worst_shift)};
}

Outcome set_distribution() {
  const Timer t;
  const std::vector<double> p = {0.5, 0.3, 0.2};
  const double exact = 0.5 * 0.3 / 0.5 + 0.3 * 0.5 / 0.7;
  const double value = set_probability(p, {0, 1});
  const double from_log = std::exp(set_log_prob(log(Tensor::vector(p)), {0, 1}).item());
  Rng rng(2026);
  const std::size_t draws = 200000;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    if (sample_k_without_replacement(p, 2, rng) == std::vector<std::size_t>{0, 1}) ++hits;
  }
  const double freq = static_cast<double>(hits) / draws;
  const double sigma = std::sqrt(exact * (1.0 - exact) / draws);
  const double secs = t.seconds();
  const bool pass = std::abs(value - 0.514285714285714) < 1e-12 && std::abs(from_log - exact) < 1e-12 &&
                    std::abs(freq - exact) <= 3.0 * sigma && secs < 10.0;
  return {pass, "P({1,2}) " + fmt(value, 15) + ", empirical " + fmt(freq, 6) + " (" +
                    fmt(std::abs(freq - exact) / sigma) + " sigma), " + fmt(secs) + " s"};
}

std::vector<double> flat_grads(const ExtractionModel& ext, const SelectionModel& sel) {
  std::vector<double> g;
  for (const auto* store : {&ext.params(), &sel.params()}) {
    for (const auto& [name, t] : *store) g.insert(g.end(), t.grad().begin(), t.grad().end());
  }
  return g;
}

Outcome reinforce_exactness() {
  const Timer t;
  Example ex;
  ex.id = "r";
  ex.question = {"q", "a"};
  ex.answers = {"a b"};
  ex.passages = {{"a", "b"}, {"c", "a"}};
  const Vocab vocab(std::vector<std::string>{"a", "b", "c", "q"});
  const EncodedExample enc = encode_example(ex, vocab);
  ModelDims dims;
  dims.d_w = 4;
  dims.d_h = 3;
  dims.d_c = 4;
  dims.common_dim = 2;
  dims.distance_dim = 3;
  dims.distance_clip = 4;
  Rng rng(11);
  ExtractionModel ext(dims, vocab.size(), rng);
  SelectionModel sel(dims, vocab.size(), rng);
  const std::size_t k = 2, max_len = 8;

  ext.params().zero_grad();
  sel.params().zero_grad();
  {
    Tape tape;
    TapeScope scope(&tape);
    tape.backward(expected_reward_loss(enc, ext, sel, k, max_len));
  }
  const std::vector<double> exact = flat_grads(ext, sel);

  const auto dists = ext.distributions(enc, max_len);
  const auto sets = enumerate_candidate_sets(dists, k, 64);
  std::vector<double> avg(exact.size(), 0.0);
  for (const auto& chosen : sets) {
    const double p = std::exp(candidate_set_log_prob(dists, chosen).item());
    ext.params().zero_grad();
    sel.params().zero_grad();
    Tape tape;
    TapeScope scope(&tape);
    tape.backward(reinforce_surrogate(enc, ext, sel, max_len, chosen).surrogate);
    const auto g = flat_grads(ext, sel);
    for (std::size_t i = 0; i < g.size(); ++i) avg[i] += p * g[i];
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(avg[i] - exact[i]));
  const double secs = t.seconds();
  return {sets.size() <= 12 && worst < 1e-8 && secs < 30.0,
          std::to_string(sets.size()) + " sets, " + std::to_string(exact.size()) + " components, max diff " +
              fmt(worst) + ", " + fmt(secs) + " s"};
}

Outcome reward_suite() {
  struct Case {
    std::string candidate;
    std::vector<std::string> golds;
    double expected;
  };
  const std::vector<Case> cases = {
      {"cuba libre", {"cuba libre"}, 2.0},
      {"Cuba Libre", {"cuba libre"}, 2.0},
      {"cuba libre .", {"cuba libre"}, 0.8},
      {"rum and lime", {"lime juice"}, 0.4},
      {"libre", {"cuba libre"}, 2.0 / 3.0},
      {"cuba", {"cuba libre"}, 2.0 / 3.0},
      {"daiquiri", {"cuba libre"}, -1.0},
      {"a b c d", {"x y"}, -1.0},
      {"the", {"the cat"}, 2.0 / 3.0},
      {"the cat sat", {"the cat"}, 0.8},
      {"sat on the mat", {"the mat"}, 2.0 / 3.0},
      {"x", {"y", "x"}, 2.0},
      {"x z", {"y", "x"}, 2.0 / 3.0},
      {"q", {"y", "x"}, -1.0},
      {"new york city", {"new york"}, 0.8},
      {"york", {"new york", "york city"}, 2.0 / 3.0},
      {"paris france", {"paris"}, 2.0 / 3.0},
      {"a a", {"a"}, 2.0 / 3.0},
      {"a", {"a a"}, 2.0 / 3.0},
      {"one two three four", {"three four five six"}, 0.5},
      {"alpha", {"beta"}, -1.0},
      {"e1 s2", {"e1 s2"}, 2.0},
      {"e1", {"e1 s2"}, 2.0 / 3.0},
      {"w1 w2 w3", {"w4"}, -1.0},
  };
  std::size_t ok = 0;
  std::string first_bad;
  for (const auto& c : cases) {
    const double want = c.expected;
    const double got = reward(c.candidate, c.golds);
    if (std::abs(got - want) < 1e-12) {
      ++ok;
    } else if (first_bad.empty()) {
      first_bad = "; \"" + c.candidate + "\" gave " + fmt(got, 6) + " want " + fmt(want, 6);
    }
  }
  return {ok == cases.size() && cases.size() >= 20,
          std::to_string(ok) + "/" + std::to_string(cases.size()) + " pairs" + first_bad};
}

struct PipelineResult {
  EvalReport dev;
  double seconds = 0.0;
};

PipelineResult run_pipeline(TrainState& state, const SynthCorpus& corpus, const TrainConfig& cfg) {
  const Timer t;
  train_pipeline(state, corpus.train, corpus.dev, cfg);
  PipelineResult r;
  r.dev = evaluate_state(state, corpus.dev, cfg);
  r.seconds = t.seconds();
  return r;
}

Outcome learning_smoke() {
  const SynthCorpus corpus = gen_synthetic(task(0.5));
  TrainState state = TrainState::create(build_vocab(corpus.train), desk_dims(), 1);
  const PipelineResult r = run_pipeline(state, corpus, schedule());
  return {r.dev.em >= 90.0 && r.seconds <= 900.0,
          "dev EM " + fmt(r.dev.em) + " F1 " + fmt(r.dev.f1) + " in " + fmt(r.seconds) + " s"};
}

Outcome ablation() {
  const SynthCorpus corpus = gen_synthetic(task(1.0));
  const TrainConfig cfg = schedule();
  TrainState state = TrainState::create(build_vocab(corpus.train), desk_dims(), 1);
  train_pipeline(state, corpus.train, corpus.dev, cfg);
  const auto rows = run_ablation(state, corpus.train, corpus.dev, cfg, {"fused_representation"});
  const double full = rows.at(0).report.em, without = rows.at(1).report.em;
  return {full - without >= 10.0,
          "full " + fmt(full) + ", without fused representation " + fmt(without) + ", drop " + fmt(full - without)};
}

Outcome k_sweep() {
  const SynthCorpus corpus = gen_synthetic(task(0.5));
  try {
    const auto rows = run_k_sweep(build_vocab(corpus.train), desk_dims(), corpus.train, corpus.dev, schedule(), {1, 2, 3});
    std::map<std::string, double> em;
    for (const auto& r : rows) em[r.variant] = r.report.em;
    return {rows.size() == 3 && em.at("K=2") >= em.at("K=1"),
            "K=1 " + fmt(em.at("K=1")) + ", K=2 " + fmt(em.at("K=2")) + ", K=3 " + fmt(em.at("K=3"))};
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "xsel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "xsel_acceptance_repro";
  fs::remove_all(root);
  const std::string base = root.string();
  const std::vector<std::string> dims = {"--d-w", "8", "--d-h", "6", "--d-c", "8"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), dims.begin(), dims.end());
    return cli(a);
  };
  const std::string train = base + "/train.jsonl", dev = base + "/dev.jsonl";
  if (cli({"gen-synth", "--seed", "5", "--out", base, "--n-train", "40", "--n-dev", "10", "--n-test", "5"}) != 0 ||
      with({"pretrain-extract", "--seed", "5", "--out", base, "--train", train, "--dev", dev, "--epochs-extract",
            "1"}) != 0 ||
      with({"pretrain-select", "--seed", "5", "--out", base, "--train", train, "--dev", dev, "--checkpoint",
            base + "/extract.ckpt.json", "--epochs-select", "1"}) != 0) {
    return {false, "setup failed"};
  }
  std::vector<std::string> ckpt, log;
  for (const char* run : {"a", "b"}) {
    const std::string out = base + "/" + run;
    if (with({"train-joint", "--seed", "9", "--out", out, "--train", train, "--dev", dev, "--checkpoint",
              base + "/select.ckpt.json", "--eval-every", "3"}) != 0) {
      return {false, "train-joint failed"};
    }
    ckpt.push_back(slurp(out + "/joint.ckpt.json"));
    log.push_back(slurp(out + "/train-joint.log.jsonl"));
  }
  fs::remove_all(root);
  const bool pass = !ckpt[0].empty() && !log[0].empty() && ckpt[0] == ckpt[1] && log[0] == log[1];
  return {pass, "checkpoint " + std::to_string(ckpt[0].size()) + " bytes, report " + std::to_string(log[0].size()) +
                    " bytes, identical: " + (pass ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"gradient-integrity", gradient_integrity},
      {"normalization", normalization},
      {"set-distribution", set_distribution},
      {"reinforce-exactness", reinforce_exactness},
      {"reward-suite", reward_suite},
      {"learning-smoke", learning_smoke},
      {"ablation-fused", ablation},
      {"k-sweep", k_sweep},
      {"reproducibility", reproducibility},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  bool all = true;
  for (const auto& [name, fn] : checks) {
    if (!only.empty() && !only.count(name)) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
