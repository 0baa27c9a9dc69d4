#include <iostream>

#include "dbbid/cli.hpp"

int main(int argc, char** argv) { return dbbid::cli::run(argc, argv, std::cout, std::cerr); }
