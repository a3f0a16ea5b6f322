// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <string>
#include <vector>

#include "driftdiff_cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return driftdiff::cli::run_cli(args, std::cout, std::cerr);
}
