// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "xsel/data.hpp"

namespace xsel {

/// Word-level F1 over token multisets; 0 when either side is empty or the
/// overlap is empty.
double token_f1(const Tokens& prediction, const Tokens& gold);

/// Best F1 against any gold answer (0 when there are none).
double best_f1(const Tokens& prediction, const std::vector<Tokens>& golds);

bool exact_match(const Tokens& prediction, const std::vector<Tokens>& golds);

/// Answer reward: 2 on exact token match, the word-level F1 on partial
/// overlap, -1 when disjoint. The maximum over gold answers is returned.
double reward(const Tokens& candidate, const std::vector<Tokens>& golds);
double reward(const std::string& candidate, const std::vector<std::string>& golds);

}  // namespace xsel
