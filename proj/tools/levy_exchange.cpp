#include <iostream>

#include "exlevy/cli.hpp"

int main(int argc, char** argv) { return exlevy::cli::run(argc, argv, std::cout, std::cerr); }
