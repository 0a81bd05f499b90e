// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xsel/data.hpp"
#include "xsel/gradcheck.hpp"
#include "xsel/model.hpp"

namespace xsel {

/// Small fixed-size example for gradient checks: `passages` passages of
/// `passage_len` tokens over a vocabulary of `vocab_size` ids (including pad
/// and unk). The answer occurs in the first passage.
struct ToyInstance {
  Vocab vocab;
  Example example;
  ModelDims dims;
};

ToyInstance make_toy_instance(std::uint64_t seed, std::size_t passages = 2,
                              std::size_t passage_len = 8, std::size_t vocab_size = 20);

struct GradCheckEntry {
  std::string name;
  GradCheckResult result;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  double max_rel_error() const;
  std::size_t checked() const;
};

/// Finite-difference checks of every differentiable op and of every
/// parameter tensor of both models on the toy instance with K = 2.
GradCheckReport run_gradcheck_suite(std::uint64_t seed, const GradCheckOptions& opts = {});

}  // namespace xsel
