// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/train.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

#include "xsel/errors.hpp"
#include "xsel/ops.hpp"
#include "xsel/tape.hpp"

namespace xsel {

void TrainConfig::validate() const {
  if (k < 1 || k > kMaxCandidatesPerPassage) {
    throw ConfigError("K must be 1, 2 or 3, got " + std::to_string(k));
  }
  if (max_span_len == 0) throw ConfigError("max_span_len must be positive");
  if (batch_extract == 0 || batch_select == 0 || batch_rl == 0) {
    throw ConfigError("batch sizes must be positive");
  }
  if (!(lr_pretrain >= 0.0) || !(lr_rl >= 0.0)) throw ConfigError("learning rates must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (report_every == 0) throw ConfigError("report_every must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"k", k},
          {"max_span_len", max_span_len},
          {"batch_extract", batch_extract},
          {"batch_select", batch_select},
          {"batch_rl", batch_rl},
          {"lr_pretrain", lr_pretrain},
          {"lr_rl", lr_rl},
          {"dropout", dropout},
          {"epochs_extract", epochs_extract},
          {"epochs_select", epochs_select},
          {"epochs_rl", epochs_rl},
          {"patience", patience},
          {"eval_every", eval_every},
          {"baseline", baseline},
          {"seed", seed}};
}

nlohmann::json StepReport::to_json() const {
  nlohmann::json j = {{"step", step}, {"phase", phase}, {"loss", loss}, {"mean_reward", mean_reward}};
  if (dev_em) j["dev_em"] = *dev_em;
  if (dev_f1) j["dev_f1"] = *dev_f1;
  return j;
}

TrainState TrainState::create(Vocab vocab, const ModelDims& dims, std::uint64_t seed,
                              const SelectionFeatures& features) {
  TrainState s;
  s.vocab = std::move(vocab);
  s.dims = dims;
  s.seed = seed;
  Rng ext_rng(derive_seed(seed, "init-extraction", 0));
  Rng sel_rng(derive_seed(seed, "init-selection", 0));
  s.extraction = std::make_unique<ExtractionModel>(dims, s.vocab.size(), ext_rng);
  s.selection = std::make_unique<SelectionModel>(dims, s.vocab.size(), sel_rng, features);
  s.rng = Rng(derive_seed(seed, "train", 0));
  return s;
}

void TrainState::reset_selection(const SelectionFeatures& features) {
  Rng sel_rng(derive_seed(seed, "init-selection", 0));
  selection = std::make_unique<SelectionModel>(dims, vocab.size(), sel_rng, features);
}

nlohmann::json TrainState::to_json() const {
  nlohmann::json params = extraction->params().to_json();
  const nlohmann::json sel = selection->params().to_json();
  for (const auto& [name, v] : sel.items()) params[name] = v;
  return {{"version", "1"},
          {"seed", seed},
          {"step", step},
          {"phase", phase},
          {"best_dev_em", best_dev_em},
          {"rng", rng.state()},
          {"dims", dims.to_json()},
          {"disabled_features", selection->features().disabled()},
          {"vocab", vocab.to_json()},
          {"params", params},
          {"optimizer", optimizer.to_json()}};
}

TrainState TrainState::from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<std::string>() != "1") {
      throw SchemaError("unsupported checkpoint version " + j.at("version").dump());
    }
    TrainState s = create(Vocab::from_json(j.at("vocab")), ModelDims::from_json(j.at("dims")),
                          j.at("seed").get<std::uint64_t>(),
                          SelectionFeatures::without(j.at("disabled_features").get<std::vector<std::string>>()));
    s.step = j.at("step").get<std::uint64_t>();
    s.phase = j.at("phase").get<std::string>();
    s.best_dev_em = j.at("best_dev_em").get<double>();
    s.rng.set_state(j.at("rng").get<std::string>());
    nlohmann::json ext = nlohmann::json::object(), sel = nlohmann::json::object();
    for (const auto& [name, v] : j.at("params").items()) {
      (name.rfind("ext.", 0) == 0 ? ext : sel)[name] = v;
    }
    s.extraction->params().load_json(ext);
    s.selection->params().load_json(sel);
    s.optimizer = RmsProp::from_json(j.at("optimizer"));
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("checkpoint: ") + e.what());
  }
}

std::string TrainState::serialize() const { return to_json().dump(); }

void TrainState::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << serialize();
}

TrainState TrainState::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

EvalReport evaluate_state(const TrainState& state, const std::vector<Example>& corpus,
                          const TrainConfig& config, bool extraction_only) {
  EvalOptions opts;
  opts.k = config.k;
  opts.max_len = config.max_span_len;
  opts.extraction_only = extraction_only;
  return evaluate(corpus, state.vocab, *state.extraction, *state.selection, opts);
}

namespace {

using Snapshot = std::vector<std::vector<double>>;

Snapshot snapshot(const ParamStore& store) {
  Snapshot s;
  for (const auto& [name, t] : store) s.emplace_back(t.data().begin(), t.data().end());
  return s;
}

void restore(ParamStore& store, const Snapshot& s) {
  std::size_t i = 0;
  for (auto& [name, t] : store) {
    std::copy(s[i].begin(), s[i].end(), t.mutable_data().begin());
    ++i;
  }
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

std::vector<EncodedExample> encode_all(const std::vector<Example>& corpus, const Vocab& vocab) {
  std::vector<EncodedExample> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) out.push_back(encode_example(ex, vocab));
  return out;
}

ForwardMode training_mode(const TrainConfig& config, Rng& rng) {
  ForwardMode mode;
  mode.training = true;
  mode.dropout = config.dropout;
  mode.rng = &rng;
  return mode;
}

// Tracks the best dev EM of a phase and decides when to stop.
class EarlyStopper {
 public:
  EarlyStopper(std::size_t patience, bool enabled) : patience_(patience), enabled_(enabled) {}

  /// Returns true when `em` is a new best.
  bool observe(double em) {
    if (!enabled_) return false;
    if (em > best_) {
      best_ = em;
      bad_ = 0;
      return true;
    }
    ++bad_;
    return false;
  }
  bool should_stop() const { return enabled_ && patience_ > 0 && bad_ >= patience_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  bool enabled_;
  double best_ = -1.0;
  std::size_t bad_ = 0;
};

}  // namespace

RlStepResult reinforce_step(TrainState& state, const std::vector<EncodedExample>& batch,
                            const TrainConfig& config, double baseline) {
  RlStepResult result;
  Tape tape;
  Tensor loss;
  {
    TapeScope scope(&tape);
    std::vector<Tensor> surrogates;
    double reward_sum = 0.0;
    for (const auto& ex : batch) {
      if (ex.passages.empty()) continue;
      Rng rng(derive_seed(state.seed, ex.source->id, state.step));
      const RlSample s = reinforce_sample(ex, *state.extraction, *state.selection, config.k,
                                          config.max_span_len, rng, training_mode(config, rng),
                                          baseline);
      surrogates.push_back(s.surrogate);
      reward_sum += s.expected_reward;
    }
    if (surrogates.empty()) return result;
    result.used = surrogates.size();
    result.mean_reward = reward_sum / surrogates.size();
    loss = mean(surrogates);
  }
  tape.backward(loss);
  result.loss = loss.item();
  state.optimizer.step(state.extraction->params(), "ext");
  state.optimizer.step(state.selection->params(), "sel");
  state.extraction->params().zero_grad();
  state.selection->params().zero_grad();
  ++state.step;
  return result;
}

void pretrain(TrainState& state, PretrainPhase phase, const std::vector<Example>& train,
              const std::vector<Example>& dev, const TrainConfig& config, const PhaseOutput& output) {
  config.validate();
  const bool extract = phase == PretrainPhase::kExtract;
  ParamStore& store = extract ? state.extraction->params() : state.selection->params();
  const std::string tag = extract ? "ext" : "sel";
  state.phase = extract ? "pretrain-extract" : "pretrain-select";
  state.optimizer = RmsProp{};
  state.optimizer.lr = config.lr_pretrain;

  const auto encoded = encode_all(train, state.vocab);
  std::vector<std::vector<Span>> candidates;
  if (!extract) {
    for (const auto& ex : encoded) {
      candidates.push_back(ex.passages.empty()
                               ? std::vector<Span>{}
                               : extract_candidates(*state.extraction, ex, config.k, config.max_span_len));
    }
  }
  const std::size_t batch_size = extract ? config.batch_extract : config.batch_select;
  const std::size_t epochs = extract ? config.epochs_extract : config.epochs_select;
  EarlyStopper stopper(config.patience, !dev.empty());
  Snapshot best = snapshot(store);

  for (std::size_t epoch = 0; epoch < epochs && !train.empty(); ++epoch) {
    const auto order = shuffled_order(encoded.size(), state.rng);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      Tape tape;
      Tensor loss;
      {
        TapeScope scope(&tape);
        std::vector<Tensor> losses;
        for (std::size_t b = start; b < std::min(order.size(), start + batch_size); ++b) {
          const auto& ex = encoded[order[b]];
          if (ex.passages.empty()) continue;
          Rng rng(derive_seed(state.seed, ex.source->id, state.step));
          const ForwardMode mode = training_mode(config, rng);
          std::optional<Tensor> l;
          if (extract) {
            l = mle_extract_loss(ex, *state.extraction, config.max_span_len, mode);
          } else if (!candidates[order[b]].empty()) {
            const auto out = state.selection->forward(ex, candidates[order[b]], mode);
            l = mle_select_loss(out, *ex.source, candidates[order[b]]);
          }
          if (l) losses.push_back(*l);
        }
        if (!losses.empty()) loss = mean(losses);
      }
      if (loss.defined()) {
        tape.backward(loss);
        state.optimizer.step(store, tag);
        store.zero_grad();
        loss_sum += loss.item();
        ++loss_count;
      }
      ++state.step;
    }
    StepReport report;
    report.step = state.step;
    report.phase = state.phase;
    report.loss = loss_count ? loss_sum / loss_count : 0.0;
    if (!dev.empty()) {
      const EvalReport r =
          extract ? evaluate_candidate_recall(dev, state.vocab, *state.extraction, config.k, config.max_span_len)
                  : evaluate_state(state, dev, config);
      report.dev_em = r.em;
      report.dev_f1 = r.f1;
      report.mean_reward = r.mean_reward;
      if (stopper.observe(r.em)) best = snapshot(store);
    }
    if (output.sink) output.sink(report);
    if (stopper.should_stop()) break;
  }
  if (!dev.empty() && stopper.best() >= 0.0) {
    restore(store, best);
    state.best_dev_em = stopper.best();
  }
  if (!output.checkpoint.empty()) state.save(output.checkpoint);
}

std::vector<double> joint_train(TrainState& state, const std::vector<Example>& train,
                                const std::vector<Example>& dev, const TrainConfig& config,
                                const PhaseOutput& output) {
  config.validate();
  state.phase = "train-joint";
  state.optimizer = RmsProp{};
  state.optimizer.lr = config.lr_rl;
  const auto encoded = encode_all(train, state.vocab);

  EarlyStopper stopper(config.patience, !dev.empty());
  Snapshot best_ext = snapshot(state.extraction->params());
  Snapshot best_sel = snapshot(state.selection->params());
  auto evaluate_dev = [&](StepReport& report) {
    const EvalReport r = evaluate_state(state, dev, config);
    report.dev_em = r.em;
    report.dev_f1 = r.f1;
    if (stopper.observe(r.em)) {
      best_ext = snapshot(state.extraction->params());
      best_sel = snapshot(state.selection->params());
    }
  };
  if (!dev.empty()) {
    StepReport report;
    report.step = state.step;
    report.phase = state.phase;
    evaluate_dev(report);
    if (output.sink) output.sink(report);
  }

  std::vector<double> rewards;
  double baseline = 0.0;
  bool have_baseline = false;
  double window_loss = 0.0, window_reward = 0.0;
  std::size_t window = 0, steps_in_phase = 0;
  bool stop = false;
  for (std::size_t epoch = 0; epoch < config.epochs_rl && !train.empty() && !stop; ++epoch) {
    const auto order = shuffled_order(encoded.size(), state.rng);
    for (std::size_t start = 0; start < order.size() && !stop; start += config.batch_rl) {
      std::vector<EncodedExample> batch;
      for (std::size_t b = start; b < std::min(order.size(), start + config.batch_rl); ++b) {
        batch.push_back(encoded[order[b]]);
      }
      const RlStepResult r =
          reinforce_step(state, batch, config, config.baseline && have_baseline ? baseline : 0.0);
      if (r.used == 0) continue;
      if (config.baseline) {
        baseline = have_baseline ? config.baseline_decay * baseline +
                                       (1.0 - config.baseline_decay) * r.mean_reward
                                 : r.mean_reward;
        have_baseline = true;
      }
      rewards.push_back(r.mean_reward);
      window_loss += r.loss;
      window_reward += r.mean_reward;
      ++window;
      ++steps_in_phase;
      const bool eval_now = !dev.empty() && config.eval_every > 0 &&
                            steps_in_phase % config.eval_every == 0;
      if (window == config.report_every || eval_now) {
        StepReport report;
        report.step = state.step;
        report.phase = state.phase;
        report.loss = window_loss / window;
        report.mean_reward = window_reward / window;
        if (eval_now) evaluate_dev(report);
        if (output.sink) output.sink(report);
        window = 0;
        window_loss = window_reward = 0.0;
        stop = stopper.should_stop();
      }
    }
    if (!dev.empty() && config.eval_every == 0 && !stop) {
      StepReport report;
      report.step = state.step;
      report.phase = state.phase;
      if (window > 0) {
        report.loss = window_loss / window;
        report.mean_reward = window_reward / window;
        window = 0;
        window_loss = window_reward = 0.0;
      }
      evaluate_dev(report);
      if (output.sink) output.sink(report);
      stop = stopper.should_stop();
    }
  }
  if (!dev.empty() && stopper.best() >= 0.0) {
    restore(state.extraction->params(), best_ext);
    restore(state.selection->params(), best_sel);
    state.best_dev_em = stopper.best();
  }
  if (!output.checkpoint.empty()) state.save(output.checkpoint);
  return rewards;
}

}  // namespace xsel
