//
// Project scicore-mol - Copyright 2026 The scicore-mol Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return scm::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
