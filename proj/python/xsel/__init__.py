# Copyright 2026 The xsel Authors.
# SPDX-License-Identifier: Apache-2.0
"""Extract-then-select multi-passage reading comprehension."""

from ._xsel import (
    XselError,
    cli,
    gen_synthetic,
    grad_check,
    load_corpus,
    reward,
    sample_k_without_replacement,
    set_probability,
    softmax_masked,
    span_distribution,
    token_f1,
    tokenize,
)

__all__ = [
    "XselError",
    "cli",
    "gen_synthetic",
    "grad_check",
    "load_corpus",
    "reward",
    "sample_k_without_replacement",
    "set_probability",
    "softmax_masked",
    "span_distribution",
    "token_f1",
    "tokenize",
]
