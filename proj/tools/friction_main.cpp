#include <iostream>

#include "friction/cli.hpp"

int main(int argc, char** argv) { return friction::cli::main(argc, argv, std::cout, std::cerr); }
