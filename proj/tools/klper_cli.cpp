#include <iostream>

#include "klper/harness/cli.hpp"

int main(int argc, char** argv) { return klper::run_cli(argc, argv, std::cout, std::cerr); }
