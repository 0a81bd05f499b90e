// Copyright 2026 The xsel Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "xsel/cli.hpp"

int main(int argc, char** argv) { return xsel::run_cli(argc, argv, std::cout, std::cerr); }
