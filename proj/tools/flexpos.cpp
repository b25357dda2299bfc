#include <iostream>

#include "flexpos/cli.hpp"

int main(int argc, char** argv) { return flexpos::cli::main(argc, argv, std::cout, std::cerr); }
