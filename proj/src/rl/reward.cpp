// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/reward.hpp"

#include <algorithm>
#include <map>

namespace xsel {

double token_f1(const Tokens& prediction, const Tokens& gold) {
  if (prediction.empty() || gold.empty()) return 0.0;
  std::map<std::string, long> counts;
  for (const auto& t : gold) ++counts[t];
  long overlap = 0;
  for (const auto& t : prediction) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / prediction.size();
  const double r = static_cast<double>(overlap) / gold.size();
  return 2.0 * p * r / (p + r);
}

double best_f1(const Tokens& prediction, const std::vector<Tokens>& golds) {
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1(prediction, g));
  return best;
}

bool exact_match(const Tokens& prediction, const std::vector<Tokens>& golds) {
  return !prediction.empty() && std::find(golds.begin(), golds.end(), prediction) != golds.end();
}

double reward(const Tokens& candidate, const std::vector<Tokens>& golds) {
  double best = -1.0;
  for (const auto& g : golds) {
    double r = -1.0;
    if (candidate == g && !g.empty()) {
      r = 2.0;
    } else {
      const double f1 = token_f1(candidate, g);
      if (f1 > 0.0) r = f1;
    }
    best = std::max(best, r);
  }
  return best;
}

double reward(const std::string& candidate, const std::vector<std::string>& golds) {
  std::vector<Tokens> g;
  for (const auto& s : golds) g.push_back(tokenize(s));
  return reward(tokenize(candidate), g);
}

}  // namespace xsel
