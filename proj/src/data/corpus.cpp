// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <istream>
#include <ostream>

#include "xsel/data.hpp"
#include "xsel/errors.hpp"

namespace xsel {

std::vector<Tokens> Example::answer_tokens() const {
  std::vector<Tokens> out;
  out.reserve(answers.size());
  for (const auto& a : answers) out.push_back(tokenize(a));
  return out;
}

nlohmann::json example_to_json(const Example& ex) {
  std::vector<std::string> passages;
  passages.reserve(ex.passages.size());
  for (const auto& p : ex.passages) passages.push_back(join_tokens(p));
  return {{"id", ex.id},
          {"question", join_tokens(ex.question)},
          {"answers", ex.answers},
          {"passages", passages}};
}

CorpusStats corpus_stats(const std::vector<Example>& corpus) {
  CorpusStats s;
  s.questions = corpus.size();
  std::size_t total = 0;
  for (const auto& ex : corpus) total += ex.passages.size();
  s.mean_passages = corpus.empty() ? 0.0 : static_cast<double>(total) / corpus.size();
  return s;
}

namespace {

Example parse_example(const std::string& line, std::size_t lineno, std::size_t max_len) {
  const std::string where = "line " + std::to_string(lineno) + ": ";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(where + "malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw SchemaError(where + "expected a JSON object");
  for (const char* field : {"id", "question", "answers", "passages"}) {
    if (!j.contains(field)) throw SchemaError(where + "missing field \"" + field + "\"");
  }
  Example ex;
  try {
    ex.id = j.at("id").get<std::string>();
    ex.question = tokenize(j.at("question").get<std::string>());
    ex.answers = j.at("answers").get<std::vector<std::string>>();
    for (const auto& p : j.at("passages").get<std::vector<std::string>>()) {
      Tokens toks = tokenize(p);
      if (toks.size() > max_len) toks.resize(max_len);
      if (!toks.empty()) ex.passages.push_back(std::move(toks));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(where + "wrong field type (" + e.what() + ")");
  }
  if (ex.question.empty()) throw SchemaError(where + "empty question");
  if (ex.answers.empty()) throw SchemaError(where + "no gold answers");
  if (ex.passages.empty()) throw SchemaError(where + "no non-empty passages");
  return ex;
}

}  // namespace

std::vector<Example> read_corpus(std::istream& in, std::size_t max_passage_len) {
  if (max_passage_len == 0) throw ConfigError("max_passage_len must be positive");
  std::vector<Example> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_example(line, lineno, max_passage_len));
  }
  return out;
}

std::vector<Example> load_corpus(const std::filesystem::path& path, std::size_t max_passage_len) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return read_corpus(in, max_passage_len);
}

void write_corpus(std::ostream& out, const std::vector<Example>& corpus) {
  for (const auto& ex : corpus) out << example_to_json(ex).dump() << '\n';
}

void save_corpus(const std::filesystem::path& path, const std::vector<Example>& corpus) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus " + path.string());
  write_corpus(out, corpus);
}

}  // namespace xsel
