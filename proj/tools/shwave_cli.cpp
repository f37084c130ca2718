#include <iostream>

#include "shwave/cli.hpp"

int main(int argc, char** argv) { return shwave::cli::run(argc, argv, std::cout, std::cerr); }
