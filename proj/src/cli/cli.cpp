// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "xsel/diagnostics.hpp"
#include "xsel/errors.hpp"
#include "xsel/experiments.hpp"
#include "xsel/params.hpp"
#include "xsel/train.hpp"

namespace xsel {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::optional<std::uint64_t> seed;
  std::string out = "xsel-out";
  std::string train, dev, corpus, checkpoint, embeddings, id;
  bool cold_start = false;
  bool extraction_only = false;
  std::size_t jobs = 1;
  std::size_t max_passage_len = kDefaultMaxPassageLen;
  TrainConfig train_config;
  ModelDims dims;
  SynthConfig synth;
  std::vector<std::string> features;
  std::vector<std::size_t> ks = {1, 2, 3};
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_options(CLI::App& app, Options& o) {
  app.add_option("--seed", o.seed, "Random seed (required by every stochastic command)");
  app.add_option("--out", o.out, "Output directory")->envname("XSEL_OUT_DIR");
  app.add_option("--train", o.train, "Training corpus (JSON lines)");
  app.add_option("--dev", o.dev, "Development corpus (JSON lines)");
  app.add_option("--corpus", o.corpus, "Corpus to evaluate (JSON lines)");
  app.add_option("--checkpoint", o.checkpoint, "Checkpoint to start from");
  app.add_flag("--cold-start", o.cold_start, "Start train-joint from fresh models");
  app.add_option("--embeddings", o.embeddings, "Text file of 'token v1 ... vd' lines");
  app.add_option("--jobs", o.jobs, "Evaluation threads")->check(CLI::PositiveNumber);
  app.add_option("--max-passage-len", o.max_passage_len, "Passage truncation length");
  app.add_flag("--extraction-only", o.extraction_only, "Evaluate the extraction stage alone");
  app.add_option("--id", o.id, "Example id for dump-attention");
  app.add_option("--features", o.features, "Features to ablate")->delimiter(',');
  app.add_option("--ks", o.ks, "K values for k-sweep")->delimiter(',');

  TrainConfig& t = o.train_config;
  app.add_option("--k", t.k, "Candidates per passage");
  app.add_option("--max-span-len", t.max_span_len, "Maximum span length");
  app.add_option("--batch-extract", t.batch_extract);
  app.add_option("--batch-select", t.batch_select);
  app.add_option("--batch-rl", t.batch_rl);
  app.add_option("--lr-pretrain", t.lr_pretrain);
  app.add_option("--lr-rl", t.lr_rl);
  app.add_option("--dropout", t.dropout);
  app.add_option("--epochs-extract", t.epochs_extract);
  app.add_option("--epochs-select", t.epochs_select);
  app.add_option("--epochs-rl", t.epochs_rl);
  app.add_option("--patience", t.patience);
  app.add_option("--eval-every", t.eval_every);
  app.add_option("--report-every", t.report_every);
  app.add_flag("--baseline", t.baseline, "Subtract a moving-average reward baseline");

  app.add_option("--d-w", o.dims.d_w, "Word embedding size");
  app.add_option("--d-h", o.dims.d_h, "LSTM hidden size");
  app.add_option("--d-c", o.dims.d_c, "Candidate representation size");

  SynthConfig& s = o.synth;
  app.add_option("--vocab-size", s.vocab_size);
  app.add_option("--entities", s.num_entities);
  app.add_option("--passages", s.passages);
  app.add_option("--passage-len", s.passage_len);
  app.add_option("--cues", s.cues);
  app.add_option("--fraction", s.cross_fraction, "Fraction of cross-evidence questions");
  app.add_option("--distractors", s.distractors);
  app.add_option("--two-token-fraction", s.two_token_fraction);
  app.add_option("--n-train", s.train);
  app.add_option("--n-dev", s.dev);
  app.add_option("--n-test", s.test);
}

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw UsageError("--seed is required");
  return *o.seed;
}

const std::string& require_path(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  return path;
}

std::vector<Example> load(const std::string& path, const Options& o) {
  return load_corpus(path, o.max_passage_len);
}

std::vector<Example> load_optional(const std::string& path, const Options& o) {
  return path.empty() ? std::vector<Example>{} : load(path, o);
}

void load_embeddings(TrainState& state, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings " + path);
  ParamStore* stores[] = {&state.extraction->params(), &state.selection->params()};
  const char* names[] = {"ext.embedding", "sel.embedding"};
  const std::size_t d = state.dims.d_w;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> vec;
    for (double v; fields >> v;) vec.push_back(v);
    if (vec.size() != d) {
      throw ParseError("embeddings line " + std::to_string(lineno) + ": expected " +
                       std::to_string(d) + " values, got " + std::to_string(vec.size()));
    }
    if (!state.vocab.contains(token)) continue;
    const std::size_t id = state.vocab.id(token);
    for (int i = 0; i < 2; ++i) {
      auto data = stores[i]->get(names[i]).mutable_data();
      std::copy(vec.begin(), vec.end(), data.begin() + id * d);
    }
  }
}

class ReportLog {
 public:
  ReportLog(const fs::path& path, std::ostream& echo) : file_(path), echo_(echo) {
    if (!file_) throw IoError("cannot write " + path.string());
  }
  ReportSink sink() {
    return [this](const StepReport& r) {
      file_ << r.to_json().dump() << '\n';
      echo_ << r.phase << " step " << r.step << " loss " << r.loss << " reward " << r.mean_reward;
      if (r.dev_em) echo_ << " dev_em " << *r.dev_em << " dev_f1 " << *r.dev_f1;
      echo_ << '\n';
    };
  }

 private:
  std::ofstream file_;
  std::ostream& echo_;
};

TrainState fresh_state(const Options& o, const std::vector<Example>& train) {
  TrainState state = TrainState::create(build_vocab(train), o.dims, require_seed(o));
  if (!o.embeddings.empty()) load_embeddings(state, o.embeddings);
  return state;
}

TrainState resume_state(const Options& o) {
  TrainState state = TrainState::load(o.checkpoint);
  state.seed = require_seed(o);
  return state;
}

void print_report(std::ostream& out, const EvalReport& r) {
  out << std::fixed << std::setprecision(2) << "EM " << r.em << " F1 " << r.f1 << " n " << r.n
      << '\n'
      << std::defaultfloat;
}

void write_eval(const fs::path& dir, const std::string& stem, const EvalReport& r) {
  std::ofstream json(dir / (stem + ".json"));
  json << r.to_json().dump(2) << '\n';
  std::ofstream csv(dir / (stem + ".csv"));
  r.write_csv(csv);
}

int cmd_gen_synth(const Options& o, const fs::path& dir, std::ostream& out) {
  SynthConfig cfg = o.synth;
  cfg.seed = require_seed(o);
  const SynthCorpus corpus = gen_synthetic(cfg);
  save_corpus(dir / "train.jsonl", corpus.train);
  save_corpus(dir / "dev.jsonl", corpus.dev);
  save_corpus(dir / "test.jsonl", corpus.test);
  out << "wrote " << corpus.train.size() << " train, " << corpus.dev.size() << " dev, "
      << corpus.test.size() << " test examples to " << dir.string() << '\n';
  return 0;
}

int cmd_pretrain(const Options& o, const fs::path& dir, std::ostream& out, PretrainPhase phase) {
  const bool extract = phase == PretrainPhase::kExtract;
  TrainConfig cfg = o.train_config;
  cfg.seed = require_seed(o);
  cfg.validate();
  const auto train = load(require_path(o.train, "--train"), o);
  const auto dev = load_optional(o.dev, o);
  TrainState state = [&] {
    if (!o.checkpoint.empty()) return resume_state(o);
    if (!extract) throw PreconditionError("pretrain-select needs --checkpoint from pretrain-extract");
    return fresh_state(o, train);
  }();
  const std::string stem = extract ? "pretrain-extract" : "pretrain-select";
  ReportLog log(dir / (stem + ".log.jsonl"), out);
  const fs::path ckpt = dir / (extract ? "extract.ckpt.json" : "select.ckpt.json");
  pretrain(state, phase, train, dev, cfg, {ckpt, log.sink()});
  out << "checkpoint " << ckpt.string() << '\n';
  return 0;
}

int cmd_train_joint(const Options& o, const fs::path& dir, std::ostream& out) {
  TrainConfig cfg = o.train_config;
  cfg.seed = require_seed(o);
  cfg.validate();
  if (o.checkpoint.empty() && !o.cold_start) {
    throw PreconditionError("train-joint needs --checkpoint or --cold-start");
  }
  const auto train = load(require_path(o.train, "--train"), o);
  const auto dev = load_optional(o.dev, o);
  TrainState state = o.checkpoint.empty() ? fresh_state(o, train) : resume_state(o);
  ReportLog log(dir / "train-joint.log.jsonl", out);
  const fs::path ckpt = dir / "joint.ckpt.json";
  joint_train(state, train, dev, cfg, {ckpt, log.sink()});
  if (!dev.empty()) {
    const EvalReport r = evaluate_state(state, dev, cfg);
    write_eval(dir, "joint.dev", r);
    print_report(out, r);
  }
  out << "checkpoint " << ckpt.string() << '\n';
  return 0;
}

int cmd_eval(const Options& o, const fs::path& dir, std::ostream& out) {
  const auto corpus = load(require_path(o.corpus, "--corpus"), o);
  const TrainState state = TrainState::load(require_path(o.checkpoint, "--checkpoint"));
  EvalOptions opts;
  opts.k = o.train_config.k;
  opts.max_len = o.train_config.max_span_len;
  opts.jobs = o.jobs;
  opts.extraction_only = o.extraction_only;
  TrainConfig check = o.train_config;
  check.validate();
  const EvalReport r = evaluate(corpus, state.vocab, *state.extraction, *state.selection, opts);
  write_eval(dir, "eval", r);
  print_report(out, r);
  return 0;
}

int cmd_ablate(const Options& o, const fs::path& dir, std::ostream& out) {
  TrainConfig cfg = o.train_config;
  cfg.seed = require_seed(o);
  const auto train = load(require_path(o.train, "--train"), o);
  const auto dev = load(require_path(o.dev, "--dev"), o);
  const TrainState base = TrainState::load(require_path(o.checkpoint, "--checkpoint"));
  ReportLog log(dir / "ablate.log.jsonl", out);
  const auto rows = run_ablation(base, train, dev, cfg, o.features, log.sink());
  std::ofstream csv(dir / "ablation.csv");
  write_experiment_csv(csv, rows);
  write_experiment_csv(out, rows);
  return 0;
}

int cmd_k_sweep(const Options& o, const fs::path& dir, std::ostream& out) {
  TrainConfig cfg = o.train_config;
  cfg.seed = require_seed(o);
  const auto train = load(require_path(o.train, "--train"), o);
  const auto dev = load(require_path(o.dev, "--dev"), o);
  ReportLog log(dir / "k-sweep.log.jsonl", out);
  const auto rows = run_k_sweep(build_vocab(train), o.dims, train, dev, cfg, o.ks, log.sink());
  std::ofstream csv(dir / "k_sweep.csv");
  write_experiment_csv(csv, rows);
  write_experiment_csv(out, rows);
  return 0;
}

int cmd_grad_check(const Options& o, std::ostream& out) {
  const GradCheckReport report = run_gradcheck_suite(require_seed(o));
  for (const auto& e : report.entries) {
    out << std::left << std::setw(24) << e.name << " checked " << std::setw(6) << e.result.checked
        << " max_rel_error " << std::scientific << std::setprecision(3) << e.result.max_rel_error
        << std::defaultfloat << " (" << e.result.worst << ")\n";
  }
  const double worst = report.max_rel_error();
  out << "max relative error: " << std::scientific << std::setprecision(3) << worst
      << std::defaultfloat << " over " << report.checked() << " entries\n";
  return worst < 1e-4 ? 0 : 1;
}

int cmd_dump_attention(const Options& o, const fs::path& dir, std::ostream& out) {
  const auto corpus = load(require_path(o.corpus, "--corpus"), o);
  const TrainState state = TrainState::load(require_path(o.checkpoint, "--checkpoint"));
  if (corpus.empty()) throw InputError("dump-attention: empty corpus");
  const Example* ex = &corpus.front();
  if (!o.id.empty()) {
    ex = nullptr;
    for (const auto& e : corpus) {
      if (e.id == o.id) ex = &e;
    }
    if (!ex) throw InputError("dump-attention: no example with id " + o.id);
  }
  const EncodedExample enc = encode_example(*ex, state.vocab);
  const auto candidates =
      extract_candidates(*state.extraction, enc, o.train_config.k, o.train_config.max_span_len);
  const SelectionOutput sel = state.selection->forward(enc, candidates);
  const fs::path path = dir / "attention.csv";
  std::ofstream csv(path);
  write_attention_csv(csv, *ex, candidates, sel.fusion.attention);
  out << "wrote " << path.string() << " for " << ex->id << " (" << candidates.size()
      << " candidates)\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-stage answer extraction and selection with REINFORCE training", "xsel"};
  app.set_config("--config", "", "File of 'key = value' lines setting any flag");
  app.require_subcommand(1);
  Options o;
  add_options(app, o);

  const std::pair<const char*, const char*> commands[] = {
      {"gen-synth", "Generate the synthetic cross-evidence corpus"},
      {"pretrain-extract", "Maximum-likelihood pretraining of the extraction model"},
      {"pretrain-select", "Maximum-likelihood pretraining of the selection model"},
      {"train-joint", "REINFORCE fine-tuning of both stages"},
      {"eval", "Evaluate a checkpoint (EM / F1)"},
      {"ablate", "Selection-feature ablation table"},
      {"k-sweep", "Train and evaluate for several K"},
      {"grad-check", "Finite-difference gradient suite"},
      {"dump-attention", "Candidate attention matrix of one question as CSV"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "xsel: " << e.what() << '\n';
    return 2;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const fs::path dir = o.out;
    if (cmd != "grad-check") fs::create_directories(dir);
    if (cmd == "gen-synth") return cmd_gen_synth(o, dir, out);
    if (cmd == "pretrain-extract") return cmd_pretrain(o, dir, out, PretrainPhase::kExtract);
    if (cmd == "pretrain-select") return cmd_pretrain(o, dir, out, PretrainPhase::kSelect);
    if (cmd == "train-joint") return cmd_train_joint(o, dir, out);
    if (cmd == "eval") return cmd_eval(o, dir, out);
    if (cmd == "ablate") return cmd_ablate(o, dir, out);
    if (cmd == "k-sweep") return cmd_k_sweep(o, dir, out);
    if (cmd == "grad-check") return cmd_grad_check(o, out);
    return cmd_dump_attention(o, dir, out);
  } catch (const UsageError& e) {
    err << "xsel " << cmd << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "xsel " << cmd << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace xsel
