// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xsel/eval.hpp"
#include "xsel/train.hpp"

namespace xsel {

struct ExperimentRow {
  std::string variant;
  EvalReport report;
  std::uint64_t seed = 0;
};

/// CSV with columns variant,em,f1,n,seed.
void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);

/// First row "full" evaluates `base` as is. Each further row re-initializes and
/// re-pretrains the selection stage with one feature disabled, on top of the
/// base extraction model. An empty `features` list runs all of them.
std::vector<ExperimentRow> run_ablation(const TrainState& base, const std::vector<Example>& train,
                                        const std::vector<Example>& dev, const TrainConfig& config,
                                        const std::vector<std::string>& features = {},
                                        const ReportSink& sink = {});

/// Full pipeline (pretrain-extract, pretrain-select, train-joint) for every K,
/// each row evaluated on `dev`. Rows are named "K=<k>".
std::vector<ExperimentRow> run_k_sweep(const Vocab& vocab, const ModelDims& dims,
                                       const std::vector<Example>& train,
                                       const std::vector<Example>& dev, const TrainConfig& config,
                                       const std::vector<std::size_t>& ks,
                                       const ReportSink& sink = {});

/// pretrain-extract, pretrain-select and train-joint in sequence.
void train_pipeline(TrainState& state, const std::vector<Example>& train,
                    const std::vector<Example>& dev, const TrainConfig& config,
                    const ReportSink& sink = {});

}  // namespace xsel
