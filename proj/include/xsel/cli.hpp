// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace xsel {

/// Command-line entry point. Returns 0 on success, 1 on a module error and 2
/// on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xsel
