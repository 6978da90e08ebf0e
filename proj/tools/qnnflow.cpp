#include <iostream>

#include "qnnflow/cli.hpp"

int main(int argc, char** argv) { return qnnflow::run_cli(argc, argv, std::cout, std::cerr); }
