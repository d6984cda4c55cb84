// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "handact/cli/commands.hpp"

int main(int argc, char** argv) { return handact::cli::run(argc, argv, std::cout, std::cerr); }
