// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xsel/data.hpp"
#include "xsel/eval.hpp"
#include "xsel/extraction.hpp"
#include "xsel/model.hpp"
#include "xsel/optim.hpp"
#include "xsel/rng.hpp"
#include "xsel/selection.hpp"

namespace xsel {

struct TrainConfig {
  std::size_t k = 2;
  std::size_t max_span_len = kDefaultMaxSpanLen;
  std::size_t batch_extract = 30;
  std::size_t batch_select = 20;
  std::size_t batch_rl = 5;
  double lr_pretrain = 2e-3;
  double lr_rl = 1e-4;
  double dropout = 0.1;
  std::size_t epochs_extract = 4;
  std::size_t epochs_select = 6;
  std::size_t epochs_rl = 1;
  /// Evaluations without a dev EM improvement before a phase stops.
  std::size_t patience = 3;
  /// RL steps between dev evaluations; 0 evaluates once per epoch.
  std::size_t eval_every = 0;
  /// RL steps between step reports.
  std::size_t report_every = 20;
  /// Optional moving-average reward baseline for the extraction term.
  bool baseline = false;
  double baseline_decay = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

/// One line of the training log.
struct StepReport {
  std::uint64_t step = 0;
  std::string phase;
  double loss = 0.0;
  double mean_reward = 0.0;
  std::optional<double> dev_em;
  std::optional<double> dev_f1;

  nlohmann::json to_json() const;
};

using ReportSink = std::function<void(const StepReport&)>;

/// Everything needed to resume or evaluate: vocabulary, both models, the
/// optimizer of the current phase, the RNG and the step counter.
struct TrainState {
  Vocab vocab;
  ModelDims dims;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::string phase = "init";
  std::unique_ptr<ExtractionModel> extraction;
  std::unique_ptr<SelectionModel> selection;
  RmsProp optimizer;
  Rng rng;
  double best_dev_em = -1.0;

  /// Fresh models; initialization draws from streams derived from `seed`.
  static TrainState create(Vocab vocab, const ModelDims& dims, std::uint64_t seed,
                           const SelectionFeatures& features = {});
  /// Re-initializes the selection model (same seed stream) with new features.
  void reset_selection(const SelectionFeatures& features);

  nlohmann::json to_json() const;
  static TrainState from_json(const nlohmann::json& j);
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;
  static TrainState load(const std::filesystem::path& path);
};

/// Where phases write their best checkpoint; empty disables writing.
struct PhaseOutput {
  std::filesystem::path checkpoint;
  ReportSink sink;
};

struct RlSample {
  Tensor surrogate;                               // scalar
  double expected_reward = 0.0;                   // sum_C P(C | set) r(C)
  std::vector<std::vector<std::size_t>> chosen;   // per passage span indices
  std::vector<Span> candidates;
};

/// R = sum_C P(C | candidates) r(C) under the selection model.
Tensor expected_selection_reward(const EncodedExample& ex, const SelectionModel& selection,
                                 const std::vector<Span>& candidates, const ForwardMode& mode = {});

/// Surrogate whose gradient is the single-sample REINFORCE estimate for the
/// candidate set `chosen`: -[R + stop(R - baseline) log P(set)] with
/// R = sum_C P(C | set) r(C).
RlSample reinforce_surrogate(const EncodedExample& ex, const ExtractionModel& extraction,
                             const SelectionModel& selection, std::size_t max_len,
                             const std::vector<std::vector<std::size_t>>& chosen,
                             const ForwardMode& mode = {}, double baseline = 0.0);

/// Samples a candidate set from the extraction model and returns its surrogate.
RlSample reinforce_sample(const EncodedExample& ex, const ExtractionModel& extraction,
                          const SelectionModel& selection, std::size_t k, std::size_t max_len,
                          Rng& rng, const ForwardMode& mode = {}, double baseline = 0.0);

/// Every candidate set with min(K, n_i) spans from each passage.
std::vector<std::vector<std::vector<std::size_t>>> enumerate_candidate_sets(
    const std::vector<SpanDistribution>& dists, std::size_t k, std::size_t budget);

/// Exact negative expected reward, enumerating every candidate set. Throws
/// BudgetError when there are more than `budget` sets.
Tensor expected_reward_loss(const EncodedExample& ex, const ExtractionModel& extraction,
                            const SelectionModel& selection, std::size_t k, std::size_t max_len,
                            std::size_t budget = 4096);

struct RlStepResult {
  double loss = 0.0;
  double mean_reward = 0.0;
  std::size_t used = 0;
};

/// One REINFORCE update over a batch (one sampled set per example).
RlStepResult reinforce_step(TrainState& state, const std::vector<EncodedExample>& batch,
                            const TrainConfig& config, double baseline = 0.0);

enum class PretrainPhase { kExtract, kSelect };

void pretrain(TrainState& state, PretrainPhase phase, const std::vector<Example>& train,
              const std::vector<Example>& dev, const TrainConfig& config,
              const PhaseOutput& output = {});

/// REINFORCE fine-tuning of both stages. Returns the running mean reward of
/// every step, in order.
std::vector<double> joint_train(TrainState& state, const std::vector<Example>& train,
                                const std::vector<Example>& dev, const TrainConfig& config,
                                const PhaseOutput& output = {});

EvalReport evaluate_state(const TrainState& state, const std::vector<Example>& corpus,
                          const TrainConfig& config, bool extraction_only = false);

}  // namespace xsel
