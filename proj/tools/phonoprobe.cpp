#include <iostream>

#include "phonoprobe/cli.hpp"

int main(int argc, char** argv) { return phonoprobe::cli::run(argc, argv, std::cout, std::cerr); }
