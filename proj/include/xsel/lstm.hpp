// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>

#include "xsel/params.hpp"
#include "xsel/tensor.hpp"

namespace xsel {

class Rng;

/// Weights of one LSTM direction. Gate blocks are stacked in the order
/// input, forget, cell, output along the rows of every tensor.
struct LstmWeights {
  Tensor w_ih;  // [4h x d_in]
  Tensor w_hh;  // [4h x h]
  Tensor bias;  // [4h]

  std::size_t input_size() const { return w_ih.dim(1); }
  std::size_t hidden_size() const { return w_hh.dim(1); }
};

struct LstmState {
  Tensor h;
  Tensor c;
};

/// Registers the three tensors under `prefix` in `params`. Recurrent weights
/// are drawn from U(-0.1, 0.1), input weights with Xavier scaling, forget
/// bias 1.
LstmWeights make_lstm(ParamStore& params, const std::string& prefix, std::size_t input_size,
                      std::size_t hidden_size, Rng& rng);

/// One LSTM step from an already projected input gx = W_ih x.
LstmState lstm_cell_projected(const Tensor& gx, const Tensor& h, const Tensor& c,
                              const Tensor& w_hh, const Tensor& bias);

/// One LSTM step: gates = W_ih x + W_hh h + b.
LstmState lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c, const LstmWeights& w);

/// Runs one direction over the columns of x [d_in x L] from a zero state and
/// returns the hidden states [h x L] in input order.
Tensor lstm_sequence(const Tensor& x, const LstmWeights& w, bool reverse);

/// A forward and a backward LSTM with concatenated outputs.
struct BiLstm {
  LstmWeights fwd;
  LstmWeights bwd;

  static BiLstm make(ParamStore& params, const std::string& prefix, std::size_t input_size,
                     std::size_t hidden_size, Rng& rng);
  std::size_t output_size() const { return 2 * fwd.hidden_size(); }
  /// [d_in x L] -> [2h x L]
  Tensor operator()(const Tensor& x) const;
};

}  // namespace xsel
