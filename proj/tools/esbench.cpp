#include <iostream>

#include "esbench/cli.hpp"

int main(int argc, char** argv) { return esbench::run_cli(argc, argv, std::cout, std::cerr); }
