#include "dmfkit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dmfkit::run_cli(argc, argv, std::cout, std::cerr); }
