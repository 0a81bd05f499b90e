// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>
#include <set>

#include "xsel/data.hpp"
#include "xsel/errors.hpp"
#include "xsel/rng.hpp"

namespace xsel {

void SynthConfig::validate() const {
  if (vocab_size == 0 || num_entities == 0 || passages == 0 || passage_len == 0 || cues == 0) {
    throw ConfigError("synthetic config: all counts must be positive");
  }
  if (!(cross_fraction >= 0.0 && cross_fraction <= 1.0)) {
    throw ConfigError("synthetic config: cross_fraction must lie in [0, 1]");
  }
  if (!(two_token_fraction >= 0.0 && two_token_fraction <= 1.0)) {
    throw ConfigError("synthetic config: two_token_fraction must lie in [0, 1]");
  }
  if (passages < 4) {
    throw ConfigError("synthetic config: need at least 4 passages (two gold, two distractor)");
  }
  if (cross_fraction > 0.0 && cues < 2) {
    throw ConfigError("synthetic config: cross-evidence questions need at least 2 cues");
  }
  if (distractors > 4) throw ConfigError("synthetic config: at most 4 co-located distractors");
  if (vocab_size < cues + 1) throw ConfigError("synthetic config: vocab_size too small for cues");
  const std::size_t needed = 2 + (passages - 4) + distractors;
  if (num_entities < needed) {
    throw ConfigError("synthetic config: need at least " + std::to_string(needed) + " entities");
  }
  // Worst case passage: all cues, two 2-token entities, and one separating filler.
  if (cues + 4 + 1 > passage_len) {
    throw ConfigError("synthetic config: cues and entities exceed passage_len");
  }
}

namespace {

struct Item {
  Tokens tokens;
  bool entity = false;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Rng& rng,
                                         const std::set<std::size_t>& excluded = {}) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (!excluded.count(i)) pool.push_back(i);
  }
  shuffle(pool, rng);
  pool.resize(k);
  return pool;
}

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg), rng_(mix_seed(cfg.seed)) {
    for (std::size_t i = 0; i < cfg.vocab_size; ++i) words_.push_back("w" + std::to_string(i));
    for (std::size_t i = 0; i < cfg.num_entities; ++i) {
      Tokens name{"e" + std::to_string(i)};
      if (rng_.bernoulli(cfg.two_token_fraction)) name.push_back("s" + std::to_string(rng_.below(10)));
      entities_.push_back(std::move(name));
    }
  }

  Example make(const std::string& id) {
    const std::size_t q = cfg_.cues;
    std::vector<std::size_t> cue_ids = sample_distinct(cfg_.vocab_size, q, rng_);
    std::set<std::size_t> cue_set(cue_ids.begin(), cue_ids.end());
    for (std::size_t i = 0; i < cfg_.vocab_size; ++i) {
      if (!cue_set.count(i)) fillers_.push_back(i);
    }

    const std::size_t n_noise = (cfg_.passages - 4) + cfg_.distractors;
    std::vector<std::size_t> ents = sample_distinct(cfg_.num_entities, 2 + n_noise, rng_);
    const std::size_t gold = ents[0], distractor = ents[1];

    auto cue_tokens = [&](const std::vector<std::size_t>& which) {
      std::vector<Item> items;
      for (std::size_t c : which) items.push_back({{words_[c]}, false});
      return items;
    };

    // Evidence passages in the order: gold-a, gold-b, distractor-c, distractor-d.
    std::vector<std::vector<Item>> evidence(4);
    const bool cross = rng_.uniform() < cfg_.cross_fraction;
    std::vector<std::size_t> shuffled = cue_ids;
    shuffle(shuffled, rng_);
    if (cross) {
      const std::size_t big = (q + 1) / 2;
      std::vector<std::size_t> part_a(shuffled.begin(), shuffled.begin() + big);
      std::vector<std::size_t> part_b(shuffled.begin() + big, shuffled.end());
      // Distractor subset: same size as the gold's largest piece but different.
      std::vector<std::size_t> subset;
      do {
        subset = sample_distinct(q, big, rng_);
        for (auto& s : subset) s = cue_ids[s];
      } while (std::set<std::size_t>(subset.begin(), subset.end()) ==
                   std::set<std::size_t>(part_a.begin(), part_a.end()) &&
               big < q);
      evidence[0] = cue_tokens(part_a);
      evidence[1] = cue_tokens(part_b);
      evidence[2] = cue_tokens(subset);
    } else {
      std::vector<std::size_t> subset(shuffled.begin(), shuffled.end() - 1);
      evidence[0] = cue_tokens(cue_ids);
      evidence[2] = cue_tokens(subset);
    }
    evidence[0].push_back({entities_[gold], true});
    evidence[1].push_back({entities_[gold], true});
    evidence[2].push_back({entities_[distractor], true});
    evidence[3].push_back({entities_[distractor], true});

    std::size_t next_noise = 2;
    const std::size_t coloc_order[4] = {1, 2, 0, 3};
    for (std::size_t i = 0; i < cfg_.distractors; ++i) {
      evidence[coloc_order[i]].push_back({entities_[ents[next_noise++]], true});
    }
    std::vector<std::vector<Item>> layouts = evidence;
    while (layouts.size() < cfg_.passages) {
      layouts.push_back({{entities_[ents[next_noise++]], true}});
    }
    shuffle(layouts, rng_);

    Example ex;
    ex.id = id;
    ex.question = {"which", "entity", "matches"};
    for (std::size_t c : cue_ids) ex.question.push_back(words_[c]);
    ex.question.push_back("?");
    ex.answers = {join_tokens(entities_[gold])};
    for (auto& items : layouts) ex.passages.push_back(render(items));
    fillers_.clear();
    return ex;
  }

 private:
  // Places the items at random, never letting two entity names touch, and
  // pads with fillers up to passage_len.
  Tokens render(std::vector<Item> items) {
    std::size_t used = 0;
    for (const auto& it : items) used += it.tokens.size();
    const std::size_t n_fill = cfg_.passage_len - used;
    for (std::size_t i = 0; i < n_fill; ++i) items.push_back({{words_[fillers_[rng_.below(fillers_.size())]]}, false});
    for (;;) {
      shuffle(items, rng_);
      bool ok = true;
      for (std::size_t i = 1; i < items.size(); ++i) {
        if (items[i].entity && items[i - 1].entity) ok = false;
      }
      if (ok) break;
    }
    Tokens out;
    for (const auto& it : items) out.insert(out.end(), it.tokens.begin(), it.tokens.end());
    return out;
  }

  const SynthConfig& cfg_;
  Rng rng_;
  std::vector<std::string> words_;
  std::vector<Tokens> entities_;
  std::vector<std::size_t> fillers_;
};

}  // namespace

SynthCorpus gen_synthetic(const SynthConfig& config) {
  config.validate();
  Generator gen(config);
  SynthCorpus out;
  for (std::size_t i = 0; i < config.train; ++i) out.train.push_back(gen.make("train-" + std::to_string(i)));
  for (std::size_t i = 0; i < config.dev; ++i) out.dev.push_back(gen.make("dev-" + std::to_string(i)));
  for (std::size_t i = 0; i < config.test; ++i) out.test.push_back(gen.make("test-" + std::to_string(i)));
  return out;
}

}  // namespace xsel
