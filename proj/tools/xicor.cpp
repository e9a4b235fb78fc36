// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "xicor/cli.hpp"

int main(int argc, char** argv) { return xicor::cli::run(argc, argv, std::cout, std::cerr); }
