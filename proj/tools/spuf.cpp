#include <iostream>

#include "spuf/cli.hpp"

int main(int argc, char** argv) { return spuf::cli::run(argc, argv, std::cout, std::cerr); }
