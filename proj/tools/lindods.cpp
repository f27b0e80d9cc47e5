#include <iostream>

#include "lindods/cli.hpp"

int main(int argc, char** argv) { return lindods::cli::run(argc, argv, std::cout, std::cerr); }
