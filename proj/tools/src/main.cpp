#include "marle/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return marle::cli::run(argc, argv, std::cout, std::cerr); }
