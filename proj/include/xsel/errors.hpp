// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace xsel {

/// Base class of every error raised by the library. The CLI maps these to
/// exit code 1 with a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define XSEL_DEFINE_ERROR(Name)           \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

XSEL_DEFINE_ERROR(DimensionError);
XSEL_DEFINE_ERROR(DomainError);
XSEL_DEFINE_ERROR(EmptySupportError);
XSEL_DEFINE_ERROR(EmptySequenceError);
XSEL_DEFINE_ERROR(RankError);
XSEL_DEFINE_ERROR(ParameterError);
XSEL_DEFINE_ERROR(InputError);
XSEL_DEFINE_ERROR(BoundsError);
XSEL_DEFINE_ERROR(ParseError);
XSEL_DEFINE_ERROR(SchemaError);
XSEL_DEFINE_ERROR(ConfigError);
XSEL_DEFINE_ERROR(DegeneratePassageError);
XSEL_DEFINE_ERROR(PreconditionError);
XSEL_DEFINE_ERROR(BudgetError);
XSEL_DEFINE_ERROR(IoError);

#undef XSEL_DEFINE_ERROR

}  // namespace xsel
