// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xsel/cli.hpp"
#include "xsel/data.hpp"
#include "xsel/diagnostics.hpp"
#include "xsel/errors.hpp"
#include "xsel/extraction.hpp"
#include "xsel/ops.hpp"
#include "xsel/reward.hpp"
#include "xsel/rng.hpp"
#include "xsel/train.hpp"

namespace py = pybind11;

namespace {

py::dict example_dict(const xsel::Example& ex) {
  py::dict d;
  d["id"] = ex.id;
  d["question"] = ex.question;
  d["answers"] = ex.answers;
  d["passages"] = ex.passages;
  return d;
}

py::list corpus_list(const std::vector<xsel::Example>& corpus) {
  py::list out;
  for (const auto& ex : corpus) out.append(example_dict(ex));
  return out;
}

py::tuple cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"xsel"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = xsel::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_xsel, m) {
  m.doc() = "Extract-then-select multi-passage reading comprehension";

  py::register_exception<xsel::Error>(m, "XselError", PyExc_RuntimeError);

  m.def("tokenize", &xsel::tokenize, py::arg("text"));
  m.def("token_f1", &xsel::token_f1, py::arg("prediction"), py::arg("gold"));
  m.def("reward",
        py::overload_cast<const std::string&, const std::vector<std::string>&>(&xsel::reward),
        py::arg("candidate"), py::arg("golds"));

  m.def("set_probability", &xsel::set_probability, py::arg("probs"), py::arg("chosen"));
  m.def(
      "sample_k_without_replacement",
      [](const std::vector<double>& probs, std::size_t k, std::uint64_t seed) {
        xsel::Rng rng(seed);
        return xsel::sample_k_without_replacement(probs, k, rng);
      },
      py::arg("probs"), py::arg("k"), py::arg("seed"));
  m.def(
      "span_distribution",
      [](const std::vector<double>& begin, const std::vector<double>& end, std::size_t max_len) {
        const auto d = xsel::span_distribution_from_scores(xsel::Tensor::vector(begin),
                                                           xsel::Tensor::vector(end), max_len);
        py::list out;
        const auto p = d.probs();
        for (std::size_t i = 0; i < d.spans.size(); ++i) {
          out.append(py::make_tuple(d.spans[i].begin, d.spans[i].end, p[i]));
        }
        return out;
      },
      py::arg("begin_scores"), py::arg("end_scores"), py::arg("max_len"),
      "List of (begin, end, probability) over every valid span.");
  m.def(
      "softmax_masked",
      [](const std::vector<double>& scores, const std::vector<bool>& mask) {
        const xsel::Tensor p = xsel::softmax_masked(xsel::Tensor::vector(scores), mask);
        return std::vector<double>(p.data().begin(), p.data().end());
      },
      py::arg("scores"), py::arg("mask"));

  m.def(
      "gen_synthetic",
      [](std::uint64_t seed, std::size_t train, std::size_t dev, std::size_t test, double fraction,
         std::size_t passages) {
        xsel::SynthConfig cfg;
        cfg.seed = seed;
        cfg.train = train;
        cfg.dev = dev;
        cfg.test = test;
        cfg.cross_fraction = fraction;
        cfg.passages = passages;
        const auto c = xsel::gen_synthetic(cfg);
        py::dict out;
        out["train"] = corpus_list(c.train);
        out["dev"] = corpus_list(c.dev);
        out["test"] = corpus_list(c.test);
        return out;
      },
      py::arg("seed"), py::arg("train") = 500, py::arg("dev") = 100, py::arg("test") = 100,
      py::arg("fraction") = 0.5, py::arg("passages") = 5);
  m.def(
      "load_corpus",
      [](const std::string& path, std::size_t max_passage_len) {
        return corpus_list(xsel::load_corpus(path, max_passage_len));
      },
      py::arg("path"), py::arg("max_passage_len") = xsel::kDefaultMaxPassageLen);

  m.def(
      "grad_check",
      [](std::uint64_t seed) {
        xsel::GradCheckReport r;
        {
          py::gil_scoped_release release;
          r = xsel::run_gradcheck_suite(seed);
        }
        py::dict out;
        out["max_rel_error"] = r.max_rel_error();
        out["checked"] = r.checked();
        py::dict entries;
        for (const auto& e : r.entries) entries[py::str(e.name)] = e.result.max_rel_error;
        out["entries"] = entries;
        return out;
      },
      py::arg("seed"));

  m.def("cli", &cli, py::arg("args"),
        "Runs the command-line interface in-process and returns (exit code, stdout, stderr).");
}
