// Copyright 2026 The sedfpd Authors
// SPDX-License-Identifier: MIT

#include <iostream>

#include "sedfpd/cli.h"

int main(int argc, char** argv) { return sedfpd::run_cli(argc, argv, std::cout, std::cerr); }
