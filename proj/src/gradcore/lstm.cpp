// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include "xsel/lstm.hpp"

#include <cmath>

#include <Eigen/Core>

#include "xsel/errors.hpp"
#include "xsel/ops.hpp"
#include "xsel/rng.hpp"
#include "xsel/tape.hpp"

namespace xsel {

namespace {

using NodePtr = std::shared_ptr<TensorNode>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LstmWeights make_lstm(ParamStore& params, const std::string& prefix, std::size_t input_size,
                      std::size_t hidden_size, Rng& rng) {
  LstmWeights w;
  w.w_ih = params.add(prefix + ".w_ih", xavier_param(4 * hidden_size, input_size, rng));
  w.w_hh = params.add(prefix + ".w_hh", uniform_param({4 * hidden_size, hidden_size}, 0.1, rng));
  std::vector<double> bias(4 * hidden_size, 0.0);
  for (std::size_t i = hidden_size; i < 2 * hidden_size; ++i) bias[i] = 1.0;
  w.bias = params.add(prefix + ".bias", Tensor::vector(std::move(bias), true));
  return w;
}

LstmState lstm_cell_projected(const Tensor& gx, const Tensor& h, const Tensor& c,
                              const Tensor& w_hh, const Tensor& bias) {
  if (w_hh.rank() != 2 || h.rank() != 1 || c.rank() != 1 || gx.rank() != 1 || bias.rank() != 1) {
    throw DimensionError("lstm_cell: expected vector state and matrix weights");
  }
  const std::size_t hs = w_hh.dim(1);
  if (w_hh.dim(0) != 4 * hs || h.dim(0) != hs || c.dim(0) != hs || gx.dim(0) != 4 * hs ||
      bias.dim(0) != 4 * hs) {
    throw DimensionError("lstm_cell: inconsistent sizes (hidden " + std::to_string(hs) +
                         ", gx " + shape_str(gx.shape()) + ", h " + shape_str(h.shape()) +
                         ", c " + shape_str(c.shape()) + ")");
  }
  Eigen::Map<const RowMat> whh(w_hh.data().data(), 4 * hs, hs);
  Eigen::Map<const Vec> hv(h.data().data(), hs);
  Vec z = whh * hv;
  // Activated gates, stacked i, f, g, o.
  std::vector<double> act(4 * hs);
  for (std::size_t i = 0; i < 4 * hs; ++i) {
    const double pre = z[i] + gx[i] + bias[i];
    act[i] = (i >= 2 * hs && i < 3 * hs) ? std::tanh(pre) : sigm(pre);
  }
  std::vector<double> c_new(hs), h_new(hs), tanh_c(hs);
  for (std::size_t k = 0; k < hs; ++k) {
    const double ig = act[k], fg = act[hs + k], gg = act[2 * hs + k], og = act[3 * hs + k];
    c_new[k] = fg * c[k] + ig * gg;
    tanh_c[k] = std::tanh(c_new[k]);
    h_new[k] = og * tanh_c[k];
  }

  bool rec = false;
  if (active_tape() != nullptr) {
    for (const Tensor* t : {&gx, &h, &c, &w_hh, &bias}) rec = rec || t->requires_grad();
  }
  LstmState out{Tensor::vector(std::move(h_new), rec), Tensor::vector(std::move(c_new), rec)};
  if (rec) {
    NodePtr gxn = gx.node(), hn = h.node(), cn = c.node(), wn = w_hh.node(), bn = bias.node();
    NodePtr hon = out.h.node(), con = out.c.node();
    active_tape()->record(
        {hon, con}, [=, act = std::move(act), tanh_c = std::move(tanh_c)] {
          // Pre-activation gradient for each gate block.
          Vec dz(4 * hs);
          for (std::size_t k = 0; k < hs; ++k) {
            const double ig = act[k], fg = act[hs + k], gg = act[2 * hs + k],
                         og = act[3 * hs + k];
            const double dh = hon->grad[k];
            const double dc = con->grad[k] + dh * og * (1.0 - tanh_c[k] * tanh_c[k]);
            dz[k] = dc * gg * ig * (1.0 - ig);
            dz[hs + k] = dc * cn->value[k] * fg * (1.0 - fg);
            dz[2 * hs + k] = dc * ig * (1.0 - gg * gg);
            dz[3 * hs + k] = dh * tanh_c[k] * og * (1.0 - og);
            if (cn->requires_grad) cn->grad[k] += dc * fg;
          }
          if (gxn->requires_grad) {
            for (std::size_t i = 0; i < 4 * hs; ++i) gxn->grad[i] += dz[i];
          }
          if (bn->requires_grad) {
            for (std::size_t i = 0; i < 4 * hs; ++i) bn->grad[i] += dz[i];
          }
          if (hn->requires_grad) {
            Eigen::Map<Vec>(hn->grad.data(), hs) +=
                Eigen::Map<const RowMat>(wn->value.data(), 4 * hs, hs).transpose() * dz;
          }
          if (wn->requires_grad) {
            Eigen::Map<RowMat>(wn->grad.data(), 4 * hs, hs) +=
                dz * Eigen::Map<const Vec>(hn->value.data(), hs).transpose();
          }
        });
  }
  return out;
}

LstmState lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c, const LstmWeights& w) {
  if (x.rank() != 1 || x.dim(0) != w.input_size()) {
    throw DimensionError("lstm_cell: input " + shape_str(x.shape()) + " vs weights " +
                         shape_str(w.w_ih.shape()));
  }
  return lstm_cell_projected(matmul(w.w_ih, x), h, c, w.w_hh, w.bias);
}

Tensor lstm_sequence(const Tensor& x, const LstmWeights& w, bool reverse) {
  if (x.rank() != 2 || x.dim(0) != w.input_size()) {
    throw DimensionError("lstm_sequence: input " + shape_str(x.shape()) + " vs weights " +
                         shape_str(w.w_ih.shape()));
  }
  const std::size_t len = x.dim(1), hs = w.hidden_size();
  const Tensor gx = matmul(w.w_ih, x);
  LstmState state{Tensor::zeros({hs}), Tensor::zeros({hs})};
  std::vector<Tensor> outputs(len);
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = reverse ? len - 1 - step : step;
    state = lstm_cell_projected(column(gx, t), state.h, state.c, w.w_hh, w.bias);
    outputs[t] = state.h;
  }
  return stack_columns(outputs);
}

BiLstm BiLstm::make(ParamStore& params, const std::string& prefix, std::size_t input_size,
                    std::size_t hidden_size, Rng& rng) {
  BiLstm b;
  b.fwd = make_lstm(params, prefix + ".fwd", input_size, hidden_size, rng);
  b.bwd = make_lstm(params, prefix + ".bwd", input_size, hidden_size, rng);
  return b;
}

Tensor BiLstm::operator()(const Tensor& x) const {
  return concat_rows({lstm_sequence(x, fwd, false), lstm_sequence(x, bwd, true)});
}

}  // namespace xsel
