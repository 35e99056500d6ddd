#include <iostream>

#include "pftl/cli.hpp"

int main(int argc, char** argv) { return pftl::cli::main(argc, argv, std::cout, std::cerr); }
