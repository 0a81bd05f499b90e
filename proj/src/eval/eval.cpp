// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

#include "xsel/errors.hpp"
#include "xsel/reward.hpp"
#include "xsel/tape.hpp"

namespace xsel {

std::vector<Span> extract_candidates(const ExtractionModel& extraction, const EncodedExample& ex,
                                     std::size_t k, std::size_t max_len) {
  std::vector<Span> out;
  for (const auto& dist : extraction.distributions(ex, max_len)) {
    for (std::size_t i : top_k_spans(dist, std::min(k, dist.spans.size()))) {
      out.push_back(dist.spans[i]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Prediction predict(const EncodedExample& ex, const ExtractionModel& extraction,
                   const SelectionModel& selection, std::size_t k, std::size_t max_len) {
  TapeScope no_tape(nullptr);
  Prediction pred;
  if (ex.passages.empty()) {
    pred.abstain = true;
    return pred;
  }
  pred.candidates = extract_candidates(extraction, ex, k, max_len);
  if (pred.candidates.empty()) {
    pred.abstain = true;
    return pred;
  }
  const SelectionOutput out = selection.forward(ex, pred.candidates);
  pred.probs = out.probs();
  auto lp = out.log_probs.data();
  const std::size_t best = static_cast<std::size_t>(std::max_element(lp.begin(), lp.end()) - lp.begin());
  pred.span = pred.candidates[best];
  pred.text = span_tokens(*ex.source, pred.span);
  return pred;
}

Prediction predict_extraction_only(const EncodedExample& ex, const ExtractionModel& extraction,
                                   std::size_t max_len) {
  TapeScope no_tape(nullptr);
  Prediction pred;
  double best = -INFINITY;
  for (const auto& dist : extraction.distributions(ex, max_len)) {
    for (std::size_t i = 0; i < dist.spans.size(); ++i) {
      if (dist.log_probs[i] > best) {
        best = dist.log_probs[i];
        pred.span = dist.spans[i];
      }
    }
  }
  if (best == -INFINITY) {
    pred.abstain = true;
    return pred;
  }
  pred.candidates = {pred.span};
  pred.probs = {std::exp(best)};
  pred.text = span_tokens(*ex.source, pred.span);
  return pred;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    recs.push_back({{"id", r.id}, {"prediction", r.prediction}, {"f1", r.f1}, {"em", r.em},
                    {"reward", r.reward}});
  }
  return {{"em", em}, {"f1", f1}, {"n", n}, {"mean_reward", mean_reward}, {"records", recs}};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void EvalReport::write_csv(std::ostream& out) const {
  out << "id,prediction,f1,em,reward\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << csv_field(r.id) << ',' << csv_field(r.prediction) << ',' << r.f1 << ',' << (r.em ? 1 : 0)
        << ',' << r.reward << '\n';
  }
}

EvalReport score_predictions(const std::vector<Example>& corpus,
                             const std::vector<Prediction>& predictions) {
  if (corpus.size() != predictions.size()) throw InputError("one prediction per example required");
  EvalReport report;
  report.n = corpus.size();
  double em = 0.0, f1 = 0.0, rw = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto golds = corpus[i].answer_tokens();
    EvalRecord rec;
    rec.id = corpus[i].id;
    if (predictions[i].abstain) {
      rec.reward = -1.0;
    } else {
      rec.prediction = join_tokens(predictions[i].text);
      rec.f1 = best_f1(predictions[i].text, golds);
      rec.em = exact_match(predictions[i].text, golds);
      rec.reward = reward(predictions[i].text, golds);
    }
    em += rec.em ? 1.0 : 0.0;
    f1 += rec.f1;
    rw += rec.reward;
    report.records.push_back(std::move(rec));
  }
  if (report.n > 0) {
    report.em = 100.0 * em / report.n;
    report.f1 = 100.0 * f1 / report.n;
    report.mean_reward = rw / report.n;
  }
  return report;
}

EvalReport evaluate(const std::vector<Example>& corpus, const Vocab& vocab,
                    const ExtractionModel& extraction, const SelectionModel& selection,
                    const EvalOptions& opts) {
  std::vector<Prediction> preds(corpus.size());
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const EncodedExample ex = encode_example(corpus[i], vocab);
      preds[i] = opts.extraction_only ? predict_extraction_only(ex, extraction, opts.max_len)
                                      : predict(ex, extraction, selection, opts.k, opts.max_len);
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, corpus.size()));
  if (jobs == 1) {
    work(0, corpus.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (corpus.size() + jobs - 1) / jobs;
    for (std::size_t j = 0; j < jobs; ++j) {
      const std::size_t lo = j * chunk, hi = std::min(corpus.size(), lo + chunk);
      if (lo < hi) threads.emplace_back(work, lo, hi);
    }
    for (auto& t : threads) t.join();
  }
  return score_predictions(corpus, preds);
}

EvalReport evaluate_candidate_recall(const std::vector<Example>& corpus, const Vocab& vocab,
                                     const ExtractionModel& extraction, std::size_t k,
                                     std::size_t max_len) {
  TapeScope no_tape(nullptr);
  std::vector<Prediction> preds(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const EncodedExample ex = encode_example(corpus[i], vocab);
    Prediction& pred = preds[i];
    pred.candidates = ex.passages.empty() ? std::vector<Span>{}
                                          : extract_candidates(extraction, ex, k, max_len);
    if (pred.candidates.empty()) {
      pred.abstain = true;
      continue;
    }
    const auto golds = corpus[i].answer_tokens();
    double best = -INFINITY;
    for (const Span& c : pred.candidates) {
      Tokens text = span_tokens(corpus[i], c);
      const double r = reward(text, golds);
      if (r > best) {
        best = r;
        pred.span = c;
        pred.text = std::move(text);
      }
    }
  }
  return score_predictions(corpus, preds);
}

void write_attention_csv(std::ostream& out, const Example& ex, const std::vector<Span>& candidates,
                         const Tensor& attention) {
  const std::size_t m = candidates.size();
  if (attention.rank() != 2 || attention.dim(0) != m || attention.dim(1) != m) {
    throw DimensionError("attention matrix does not match the candidate count");
  }
  std::vector<std::string> names;
  for (const auto& c : candidates) {
    names.push_back(csv_field(join_tokens(span_tokens(ex, c)) + " [p" + std::to_string(c.passage) +
                              ":" + std::to_string(c.begin) + "-" + std::to_string(c.end) + "]"));
  }
  out << "candidate";
  for (const auto& n : names) out << ',' << n;
  out << '\n' << std::setprecision(17);
  for (std::size_t j = 0; j < m; ++j) {
    out << names[j];
    for (std::size_t k = 0; k < m; ++k) out << ',' << attention.at(j, k);
    out << '\n';
  }
}

nlohmann::json candidate_dump(const Example& ex, const std::vector<Span>& candidates,
                              const std::vector<double>& logps) {
  if (logps.size() != candidates.size()) throw InputError("one log-probability per candidate required");
  nlohmann::json cands = nlohmann::json::array();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Span& c = candidates[i];
    cands.push_back({{"passage", c.passage},
                     {"begin", c.begin},
                     {"end", c.end},
                     {"logp", logps[i]},
                     {"text", join_tokens(span_tokens(ex, c))}});
  }
  return {{"id", ex.id}, {"candidates", cands}};
}

}  // namespace xsel
