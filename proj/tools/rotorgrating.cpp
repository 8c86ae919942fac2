#include "rotorgrating/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rotorgrating::cli::run(argc, argv, std::cout, std::cerr); }
