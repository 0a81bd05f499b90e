// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/experiments.hpp"

#include <ostream>

#include "xsel/errors.hpp"

namespace xsel {

void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << "variant,em,f1,n,seed\n";
  for (const auto& row : rows) {
    out << row.variant << ',' << row.report.em << ',' << row.report.f1 << ',' << row.report.n << ','
        << row.seed << '\n';
  }
}

void train_pipeline(TrainState& state, const std::vector<Example>& train,
                    const std::vector<Example>& dev, const TrainConfig& config,
                    const ReportSink& sink) {
  pretrain(state, PretrainPhase::kExtract, train, dev, config, {{}, sink});
  pretrain(state, PretrainPhase::kSelect, train, dev, config, {{}, sink});
  joint_train(state, train, dev, config, {{}, sink});
}

std::vector<ExperimentRow> run_ablation(const TrainState& base, const std::vector<Example>& train,
                                        const std::vector<Example>& dev, const TrainConfig& config,
                                        const std::vector<std::string>& features,
                                        const ReportSink& sink) {
  config.validate();
  std::vector<std::string> names = features;
  if (names.empty()) names.assign(SelectionFeatures::kNames.begin(), SelectionFeatures::kNames.end());
  SelectionFeatures::without(names);

  std::vector<ExperimentRow> rows;
  rows.push_back({"full", evaluate_state(base, dev, config), base.seed});
  for (const auto& name : names) {
    TrainState variant = TrainState::from_json(base.to_json());
    variant.reset_selection(SelectionFeatures::without({name}));
    pretrain(variant, PretrainPhase::kSelect, train, dev, config, {{}, sink});
    rows.push_back({name, evaluate_state(variant, dev, config), base.seed});
  }
  return rows;
}

std::vector<ExperimentRow> run_k_sweep(const Vocab& vocab, const ModelDims& dims,
                                       const std::vector<Example>& train,
                                       const std::vector<Example>& dev, const TrainConfig& config,
                                       const std::vector<std::size_t>& ks, const ReportSink& sink) {
  for (std::size_t k : ks) {
    TrainConfig c = config;
    c.k = k;
    c.validate();
  }
  // Extraction pretraining is shared across K.
  TrainState pretrained = TrainState::create(vocab, dims, config.seed);
  if (!ks.empty()) pretrain(pretrained, PretrainPhase::kExtract, train, dev, config, {{}, sink});
  const nlohmann::json after_extract = pretrained.to_json();

  std::vector<ExperimentRow> rows;
  for (std::size_t k : ks) {
    TrainConfig c = config;
    c.k = k;
    TrainState state = TrainState::from_json(after_extract);
    pretrain(state, PretrainPhase::kSelect, train, dev, c, {{}, sink});
    joint_train(state, train, dev, c, {{}, sink});
    rows.push_back({"K=" + std::to_string(k), evaluate_state(state, dev, c), config.seed});
  }
  return rows;
}

}  // namespace xsel
