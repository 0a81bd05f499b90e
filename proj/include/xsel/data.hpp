// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace xsel {

using Tokens = std::vector<std::string>;

/// Lowercases ASCII, splits on whitespace and emits every ASCII punctuation
/// character as its own token. Bytes >= 0x80 are kept inside words.
Tokens tokenize(const std::string& text);
std::string join_tokens(const Tokens& tokens);

/// One question with its gold answers and N tokenized passages.
struct Example {
  std::string id;
  Tokens question;
  std::vector<std::string> answers;
  std::vector<Tokens> passages;

  std::vector<Tokens> answer_tokens() const;
};

nlohmann::json example_to_json(const Example& ex);

struct CorpusStats {
  std::size_t questions = 0;
  double mean_passages = 0.0;
};
CorpusStats corpus_stats(const std::vector<Example>& corpus);

inline constexpr std::size_t kDefaultMaxPassageLen = 60;

/// Reads one JSON object per line ({"id", "question", "answers", "passages"}).
/// Passages are truncated to `max_passage_len` tokens; passages that tokenize
/// to nothing are dropped. Blank lines are skipped. Throws ParseError or
/// SchemaError naming the 1-based line number.
std::vector<Example> read_corpus(std::istream& in, std::size_t max_passage_len = kDefaultMaxPassageLen);
std::vector<Example> load_corpus(const std::filesystem::path& path,
                                 std::size_t max_passage_len = kDefaultMaxPassageLen);
void write_corpus(std::ostream& out, const std::vector<Example>& corpus);
void save_corpus(const std::filesystem::path& path, const std::vector<Example>& corpus);

/// Token <-> id map with reserved ids 0 (PAD) and 1 (UNK).
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocab();
  explicit Vocab(std::vector<std::string> tokens);

  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::vector<std::size_t> ids(const Tokens& tokens) const;
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Ids for every question/passage token seen at least `min_count` times,
/// assigned in lexicographic token order.
Vocab build_vocab(const std::vector<Example>& examples, std::size_t min_count = 1);

struct SynthConfig {
  std::size_t vocab_size = 60;       // filler/cue word pool
  std::size_t num_entities = 40;     // entity name pool
  std::size_t passages = 5;          // N
  std::size_t passage_len = 12;
  std::size_t cues = 3;              // cue words per question
  double cross_fraction = 0.5;
  /// Noise entities placed next to evidence mentions, one per evidence
  /// passage in the order: gold's second passage, distractor's first, gold's
  /// first, distractor's second.
  std::size_t distractors = 1;
  double two_token_fraction = 0.3;   // entities with a two-token name
  std::size_t train = 500;
  std::size_t dev = 100;
  std::size_t test = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthCorpus {
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
};

/// Deterministic corpus whose questions ask for the entity that co-occurs with
/// every cue word of the question. Cross-evidence questions spread the gold
/// entity's cues over two passages so that no single passage holds them all;
/// one distractor entity matches the gold's best single passage but never
/// covers the full cue set.
SynthCorpus gen_synthetic(const SynthConfig& config);

}  // namespace xsel
