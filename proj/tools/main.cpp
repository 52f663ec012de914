#include <iostream>

#include "pseudorot/cli.hpp"

int main(int argc, char** argv) { return pseudorot::cli::run_main(argc, argv, std::cout, std::cerr); }
